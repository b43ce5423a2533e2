/* Copyright (C) 2026 The fhellm Authors
 * This program is Licensed under the Apache License, Version 2.0
 * (the "License"); you may not use this file except in compliance
 * with the License. You may obtain a copy of the License at
 *   http://www.apache.org/licenses/LICENSE-2.0
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License. See accompanying LICENSE file.
 */
#include "fhellm/sospoly.h"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fhellm {

namespace {

constexpr double kPairTol = 1e-6;

Series cheb_of(const ApproxPoly& p) { return to_chebyshev(p).coeffs; }

void check_even_positive(const Series& c)
{
  const std::size_t n = c.size() - 1;
  if (c.empty() || n % 2 != 0)
    throw std::invalid_argument("polynomial degree must be even");
  if (!(c.back() > 0))
    throw std::invalid_argument("leading coefficient must be positive");
}

double max_neg_series(const Series& c)
{
  check_even_positive(c);
  if (c.size() == 1)
    return -c[0];
  // evaluating at non-critical points can only overestimate the minimum
  double lo = std::numeric_limits<double>::infinity();
  for (auto z : cheb_roots(cheb_der(c)))
    lo = std::min(lo, cheb_eval(c, z.real()));
  return -lo;
}

double sup_abs_sum(const Series& u, const Series& v)
{
  double s = 0;
  const int n = 1000;
  for (int i = 0; i <= n; ++i) {
    double t = -1.0 + 2.0 * i / n;
    s = std::max(s, std::abs(cheb_eval(u, t)) + std::abs(cheb_eval(v, t)));
  }
  return s;
}

void leja(std::vector<std::complex<double>>& r)
{
  if (r.size() < 3)
    return;
  std::size_t first = 0;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (std::abs(r[i]) > std::abs(r[first]))
      first = i;
  std::swap(r[0], r[first]);
  std::vector<double> logd(r.size(), 0.0);
  for (std::size_t k = 1; k < r.size(); ++k) {
    std::size_t best = k;
    double bv = -std::numeric_limits<double>::infinity();
    for (std::size_t i = k; i < r.size(); ++i) {
      logd[i] += std::log(std::abs(r[i] - r[k - 1]) + 1e-300);
      if (logd[i] > bv) {
        bv = logd[i];
        best = i;
      }
    }
    std::swap(r[k], r[best]);
    std::swap(logd[k], logd[best]);
  }
}

struct CoreSplit
{
  Series u, v;
  double m = 0;
};

std::size_t pair_count(const Series& r)
{
  std::size_t upper = 0;
  for (auto z : cheb_roots(r))
    upper += z.imag() > kPairTol;
  return upper;
}

CoreSplit split_core(const Series& c, const RootOrdering& ord,
                     const SosOptions& opts)
{
  const double m_min = max_neg_series(c);
  const double scale = max_coeff(c);
  const std::size_t n = c.size() - 1;
  CoreSplit out;
  if (opts.m_override) {
    if (*opts.m_override < m_min - 1e-9 * scale)
      throw std::invalid_argument("m override is below max(-P)");
    out.m = *opts.m_override;
  } else {
    out.m = m_min + opts.margin * scale;
  }
  Series r = c;
  r[0] += out.m;

  std::vector<std::complex<double>> upper, reals, chosen;
  std::size_t lower = 0;
  for (auto z : n > 0 ? cheb_roots(r) : std::vector<std::complex<double>>{}) {
    if (z.imag() > kPairTol)
      upper.push_back(z);
    else if (z.imag() < -kPairTol)
      ++lower;
    else
      reals.push_back(z.real());
  }
  if (upper.size() != lower || reals.size() % 2 != 0) {
    std::ostringstream msg;
    msg << "root pairing failed: " << upper.size() << " upper, " << lower
        << " lower, " << reals.size() << " real roots";
    throw std::runtime_error(msg.str());
  }
  auto by_re = [](auto a, auto b) { return a.real() < b.real(); };
  std::sort(upper.begin(), upper.end(), by_re);
  std::sort(reals.begin(), reals.end(), by_re);
  for (std::size_t i = 0; i < upper.size(); ++i) {
    bool flip = i < ord.flip.size() ? ord.flip[i] : (i % 2 == 1);
    chosen.push_back(flip ? std::conj(upper[i]) : upper[i]);
  }
  for (std::size_t i = 0; i < reals.size(); i += 2)
    chosen.push_back(0.5 * (reals[i] + reals[i + 1]));
  leja(chosen);

  CSeries q{1.0};
  for (auto h : chosen) {
    CSeries tq = cheb_mulx(q);
    for (std::size_t i = 0; i < q.size(); ++i)
      tq[i] -= h * q[i];
    for (auto& x : tq)
      x *= 2.0;
    q = std::move(tq);
  }
  Series re(q.size()), im(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    re[i] = q[i].real();
    im[i] = q[i].imag();
  }
  Series s = series_add(cheb_mul(re, re), cheb_mul(im, im));
  double f = std::sqrt(r[n] / s[n]);
  out.u.resize(q.size());
  out.v.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.u[i] = f * (opts.beta * re[i] + opts.alpha * im[i]);
    out.v[i] = f * (opts.alpha * re[i] - opts.beta * im[i]);
  }
  if (out.u.back() < 0)
    out.u = series_scale(out.u, -1.0);
  if (out.v.back() < 0)
    out.v = series_scale(out.v, -1.0);
  return out;
}

ApproxPoly with_coeffs(const ApproxPoly& like, Series c)
{
  ApproxPoly p;
  p.basis = Basis::chebyshev;
  p.lo = like.lo;
  p.hi = like.hi;
  p.target = like.target;
  p.coeffs = std::move(c);
  return p;
}

using Chooser = std::function<RootOrdering(const Series&)>;

SosTree grow(const Series& root, int k, int j, const ApproxPoly& like,
             const SosOptions& opts, const Chooser& choose)
{
  SosTree tree;
  tree.k = k;
  tree.j = j;
  tree.lo = like.lo;
  tree.hi = like.hi;
  tree.alpha = opts.alpha;
  tree.beta = opts.beta;
  tree.levels.resize(j + 1);
  tree.levels[0].push_back(SosNode{with_coeffs(like, root), 0.0});
  for (int l = 1; l <= j; ++l) {
    const std::size_t h = std::size_t{1} << (l - 1);
    tree.levels[l].resize(2 * h);
    double score = 0;
    for (std::size_t i = 0; i < h; ++i) {
      const Series& parent = tree.levels[l - 1][i].u.coeffs;
      CoreSplit s = split_core(parent, choose(parent), opts);
      tree.levels[l - 1][i].m = s.m;
      score = std::max(score, sup_abs_sum(s.u, s.v));
      tree.levels[l][i].u = with_coeffs(like, std::move(s.u));
      tree.levels[l][i + h].u = with_coeffs(like, std::move(s.v));
    }
    tree.scores.push_back(score);
  }
  return tree;
}

} // namespace

double max_neg(const ApproxPoly& p) { return max_neg_series(cheb_of(p)); }

RootSet find_roots(const ApproxPoly& p)
{
  if (p.degree() < 1)
    throw std::invalid_argument("find_roots needs degree >= 1");
  RootSet rs;
  double scale = max_coeff(p.coeffs);
  if (p.basis == Basis::monomial) {
    rs.roots = mono_roots(p.coeffs);
    rs.lead = p.coeffs.back();
    for (auto z : rs.roots) {
      double res = std::abs(mono_eval(p.coeffs, z));
      if (res > 1e-8 * scale)
        throw std::runtime_error("root finding did not converge, residual " +
                                 std::to_string(res));
    }
    return rs;
  }
  const int n = p.degree();
  double a = 2.0 / (p.hi - p.lo);
  rs.lead = p.coeffs.back() * std::ldexp(1.0, n - 1) * std::pow(a, n);
  for (auto t : cheb_roots(p.coeffs)) {
    double res = std::abs(cheb_eval(p.coeffs, t));
    if (res > 1e-8 * scale)
      throw std::runtime_error("root finding did not converge, residual " +
                               std::to_string(res));
    rs.roots.push_back(0.5 * ((p.hi - p.lo) * t + p.lo + p.hi));
  }
  return rs;
}

SosSplit split_sos(const ApproxPoly& p, const RootOrdering& ordering,
                   const SosOptions& opts)
{
  CoreSplit s = split_core(cheb_of(p), ordering, opts);
  return SosSplit{with_coeffs(p, std::move(s.u)), with_coeffs(p, std::move(s.v)),
                  s.m};
}

double split_score(const SosSplit& s)
{
  return sup_abs_sum(to_chebyshev(s.u).coeffs, to_chebyshev(s.v).coeffs);
}

namespace {

RootOrdering best_ordering(const Series& c, int trials, std::mt19937_64& rng,
                           const SosOptions& opts)
{
  RootOrdering best;
  if (trials <= 1)
    return best;
  CoreSplit s0 = split_core(c, best, opts);
  double best_score = sup_abs_sum(s0.u, s0.v);
  Series r = c;
  r[0] += s0.m;
  const std::size_t pairs = pair_count(r);
  for (int t = 1; t < trials; ++t) {
    RootOrdering cand;
    for (std::size_t i = 0; i < pairs; ++i)
      cand.flip.push_back(rng() & 1);
    CoreSplit s = split_core(c, cand, opts);
    double sc = sup_abs_sum(s.u, s.v);
    if (sc < best_score) {
      best_score = sc;
      best = cand;
    }
  }
  return best;
}

} // namespace

RootOrdering search_stable(const ApproxPoly& p, int trials, std::uint64_t seed,
                           const SosOptions& opts)
{
  if (trials < 1)
    throw std::invalid_argument("trials must be >= 1");
  std::mt19937_64 rng(seed);
  return best_ordering(cheb_of(p), trials, rng, opts);
}

double SosTree::score() const
{
  double s = 0;
  for (double x : scores)
    s = std::max(s, x);
  return s;
}

SosTree build_tree(const ApproxPoly& p, const TreeOptions& opts)
{
  Series c = cheb_of(p);
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1 || (n & (n - 1)) != 0)
    throw std::invalid_argument("tree polynomial degree must be a power of two");
  const int k = std::countr_zero(static_cast<unsigned>(n));
  if (opts.j < 0 || opts.j >= std::max(k, 1))
    throw std::invalid_argument("tree depth must satisfy 0 <= j < k");
  if (c.back() == 0.0)
    throw std::invalid_argument("leading coefficient must be non-zero");
  int sign = c.back() > 0 ? 1 : -1;
  if (sign < 0)
    c = series_scale(c, -1.0);

  auto plain = [](const Series&) { return RootOrdering{}; };
  SosTree tree = grow(c, k, opts.j, p, opts.split, plain);
  if (opts.trials > 1) {
    std::mt19937_64 rng(opts.seed);
    auto greedy = [&](const Series& node) {
      return best_ordering(node, opts.trials, rng, opts.split);
    };
    SosTree alt = grow(c, k, opts.j, p, opts.split, greedy);
    if (alt.score() < tree.score())
      tree = std::move(alt);
  }
  const double res = tree_residual(tree);
  if (!std::isfinite(tree.score()) || !(res < 1e-6))
    throw std::domain_error("decomposition is numerically unstable; lower "
                            "the degree");
  tree.sign = sign;
  return tree;
}

double tree_residual(const SosTree& tree)
{
  double worst = 0;
  for (int l = 1; l <= tree.j; ++l) {
    const std::size_t h = std::size_t{1} << (l - 1);
    for (std::size_t i = 0; i < h; ++i) {
      const auto& a = tree.levels[l][i].u.coeffs;
      const auto& b = tree.levels[l][i + h].u.coeffs;
      const auto& parent = tree.levels[l - 1][i];
      Series r = series_sub(series_add(cheb_mul(a, a), cheb_mul(b, b)),
                            parent.u.coeffs);
      r[0] -= parent.m;
      worst = std::max(worst, max_coeff(r) / max_coeff(parent.u.coeffs));
    }
  }
  return worst;
}

double tree_eval_clear(const SosTree& tree, double x)
{
  double t = (2.0 * x - tree.lo - tree.hi) / (tree.hi - tree.lo);
  std::vector<double> v;
  for (const auto& node : tree.leaves())
    v.push_back(cheb_eval(node.u.coeffs, t));
  for (int l = tree.j; l >= 1; --l) {
    const std::size_t h = std::size_t{1} << (l - 1);
    std::vector<double> w(h);
    for (std::size_t i = 0; i < h; ++i)
      w[i] = v[i] * v[i] + v[i + h] * v[i + h] - tree.levels[l - 1][i].m;
    v = std::move(w);
  }
  return tree.sign * v[0];
}

namespace {

std::vector<Series> leaf_monomials(const SosTree& tree)
{
  std::vector<Series> out;
  const std::size_t d = std::size_t{1} << (tree.k - tree.j);
  for (const auto& node : tree.leaves()) {
    Series m = cheb_to_mono(node.u.coeffs);
    m.resize(d + 1, 0.0);
    out.push_back(std::move(m));
  }
  return out;
}

void check_budget(const Evaluator& ev, int t_bits, int j)
{
  if (t_bits < 0 || j < 0 ||
      (std::size_t{1} << (t_bits + j)) > ev.slots())
    throw std::invalid_argument("slim evaluation: 2^(t+j) exceeds slot_count");
}

std::size_t block_of(std::size_t s, int t_bits, int j)
{
  return (s >> t_bits) & ((std::size_t{1} << j) - 1);
}

} // namespace

std::vector<double> leaf_scales(const SosTree& tree)
{
  const int d = 1 << (tree.k - tree.j);
  std::vector<double> out;
  for (const auto& m : leaf_monomials(tree)) {
    if (!(m[d] > 0))
      throw std::invalid_argument(
          "fused evaluation needs positive leaf leading coefficients");
    out.push_back(std::pow(m[d], 1.0 / d));
  }
  return out;
}

SimCiphertext prepare_slim_input(Evaluator& ev, const SimCiphertext& ct,
                                 const SosTree& tree, int t_bits, bool fused)
{
  check_budget(ev, t_bits, tree.j);
  const double a = 2.0 / (tree.hi - tree.lo);
  const double b = -(tree.lo + tree.hi) / (tree.hi - tree.lo);
  std::vector<double> lam;
  if (fused)
    lam = leaf_scales(tree);
  const std::size_t n = ev.slots();
  std::vector<double> mul(n), add(n);
  for (std::size_t s = 0; s < n; ++s) {
    double l = fused ? lam[block_of(s, t_bits, tree.j)] : 1.0;
    mul[s] = a * l;
    add[s] = b * l;
  }
  SimCiphertext r = ev.pc_mult(SimPlaintext{mul, ev.params().log_scale}, ct);
  return ev.add_plain(r, SimPlaintext{add, r.log_scale});
}

SimCiphertext replicate_slim(Evaluator& ev, const SimCiphertext& ct,
                             int t_bits, int j)
{
  check_budget(ev, t_bits, j);
  SimCiphertext r = ct;
  for (int i = 0; i < j; ++i)
    r = ev.add(r, ev.rotate(r, -(long{1} << (t_bits + i))));
  return r;
}

SimCiphertext slim_eval(Evaluator& ev, const SosTree& tree,
                        const SimCiphertext& ct, int t_bits, bool fused)
{
  check_budget(ev, t_bits, tree.j);
  const int need = fused ? tree.k : tree.k + 1;
  if (ct.level < need)
    throw NeedsBootstrap("slim evaluation needs " + std::to_string(need) +
                         " levels");
  const int j = tree.j;
  const int d = 1 << (tree.k - j);
  const std::size_t n = ev.slots();
  std::vector<Series> leaves = leaf_monomials(tree);
  std::vector<double> lam;
  if (fused)
    lam = leaf_scales(tree);

  std::vector<SimPlaintext> coeffs;
  for (int delta = 0; delta <= d; ++delta) {
    std::vector<double> v(n);
    for (std::size_t s = 0; s < n; ++s) {
      std::size_t blk = block_of(s, t_bits, j);
      if (fused)
        v[s] = delta == d ? 1.0 : leaves[blk][delta] / std::pow(lam[blk], delta);
      else
        v[s] = leaves[blk][delta];
    }
    coeffs.push_back(SimPlaintext{std::move(v), ev.params().log_scale});
  }
  int depth = fused ? tree.k - j : tree.k - j + 1;
  SimCiphertext r = ps_eval_pt_coeffs(ev, coeffs, ct, Basis::monomial, depth);

  for (int l = j; l >= 1; --l) {
    SimCiphertext sq = ev.square(r);
    r = ev.add(sq, ev.rotate(sq, long{1} << (t_bits + l - 1)));
    std::vector<double> m(n);
    for (std::size_t s = 0; s < n; ++s)
      m[s] = -tree.levels[l - 1][block_of(s, t_bits, l - 1)].m;
    r = ev.add_plain(r, SimPlaintext{std::move(m), r.log_scale});
  }
  return tree.sign < 0 ? ev.negate(r) : r;
}

} // namespace fhellm
