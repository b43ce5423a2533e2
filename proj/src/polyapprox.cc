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
#include "fhellm/polyapprox.h"

#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace fhellm {

std::function<double(double)> named_function(const std::string& name)
{
  if (name == "exp")
    return [](double x) { return std::exp(x); };
  if (name == "silu")
    return [](double x) { return x / (1.0 + std::exp(-x)); };
  if (name == "invsqrt")
    return [](double x) { return 1.0 / std::sqrt(x); };
  throw std::invalid_argument("unknown function: " + name);
}

ApproxPoly chebyshev_fit(const std::function<double(double)>& f, double lo,
                         double hi, int degree, std::string target)
{
  if (!(lo < hi))
    throw std::invalid_argument("interval must satisfy lo < hi");
  if (degree < 0)
    throw std::invalid_argument("degree must be non-negative");
  const int n = degree + 1;
  ApproxPoly p;
  p.basis = Basis::chebyshev;
  p.lo = lo;
  p.hi = hi;
  p.target = std::move(target);
  std::vector<double> fx(n);
  for (int k = 0; k < n; ++k) {
    double t = std::cos(std::numbers::pi * (k + 0.5) / n);
    fx[k] = f(p.from_t(t));
    if (!std::isfinite(fx[k]))
      throw std::domain_error("function is not finite at a Chebyshev node");
  }
  p.coeffs.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0;
    for (int k = 0; k < n; ++k)
      s += fx[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
    p.coeffs[j] = 2.0 * s / n;
  }
  p.coeffs[0] *= 0.5;
  return p;
}

double eval_clear(const ApproxPoly& p, double x)
{
  if (p.basis == Basis::chebyshev)
    return cheb_eval(p.coeffs, p.to_t(x));
  return mono_eval(p.coeffs, x);
}

double sup_error(const ApproxPoly& p, const std::function<double(double)>& f,
                 int points)
{
  if (points <= 0)
    points = 10 * std::max(p.degree(), 1);
  double e = 0;
  for (int i = 0; i <= points; ++i) {
    double x = p.lo + (p.hi - p.lo) * i / points;
    e = std::max(e, std::abs(eval_clear(p, x) - f(x)));
  }
  return e;
}

namespace {

// q(s) = sum_k m_k (a s + b)^k
Series compose_affine(std::span<const double> m, double a, double b)
{
  Series r{0.0};
  const Series lin{b, a};
  for (std::size_t k = m.size(); k-- > 0;) {
    r = mono_mul(r, lin);
    r[0] += m[k];
  }
  r.resize(std::max<std::size_t>(m.size(), 1));
  return r;
}

} // namespace

ApproxPoly to_monomial(const ApproxPoly& p)
{
  if (p.basis == Basis::monomial)
    return p;
  ApproxPoly q = p;
  q.basis = Basis::monomial;
  double a = 2.0 / (p.hi - p.lo), b = -(p.lo + p.hi) / (p.hi - p.lo);
  q.coeffs = compose_affine(cheb_to_mono(p.coeffs), a, b);
  return q;
}

ApproxPoly to_chebyshev(const ApproxPoly& p)
{
  if (p.basis == Basis::chebyshev)
    return p;
  ApproxPoly q = p;
  q.basis = Basis::chebyshev;
  double h = 0.5 * (p.hi - p.lo), c = 0.5 * (p.hi + p.lo);
  q.coeffs = mono_to_cheb(compose_affine(p.coeffs, h, c));
  q.coeffs.resize(p.coeffs.size(), 0.0);
  return q;
}

Series centered_monomial(const ApproxPoly& p)
{
  double h = 0.5 * (p.hi - p.lo), c = 0.5 * (p.hi + p.lo);
  if (p.basis == Basis::monomial)
    return compose_affine(p.coeffs, 1.0, c);
  Series m = cheb_to_mono(p.coeffs);
  double s = 1.0;
  for (double& x : m) {
    x /= s;
    s *= h;
  }
  return m;
}

int ps_depth(int degree)
{
  if (degree <= 0)
    return 0;
  return std::bit_width(static_cast<unsigned>(degree));
}

namespace {

// A coefficient is either a scalar (size 1) or one value per slot.
using Coef = std::vector<double>;

bool is_zero(const Coef& c)
{
  for (double x : c)
    if (x != 0.0)
      return false;
  return true;
}

bool is_one(const Coef& c)
{
  for (double x : c)
    if (x != 1.0)
      return false;
  return !c.empty();
}

Coef coef_axpy(const Coef& a, double s, const Coef& b)
{
  // a + s*b with broadcasting
  std::size_t n = std::max(a.size(), b.size());
  Coef r(n);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = a[a.size() == 1 ? 0 : i] + s * b[b.size() == 1 ? 0 : i];
  return r;
}

int lead_index(const std::vector<Coef>& c)
{
  int n = static_cast<int>(c.size()) - 1;
  while (n > 0 && is_zero(c[n]))
    --n;
  return std::max(n, 0);
}

bool pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int log2i(int n) { return std::bit_width(static_cast<unsigned>(n)) - 1; }

int need_depth(const std::vector<Coef>& c)
{
  int n = lead_index(c);
  if (n == 0)
    return 0;
  if (pow2(n) && is_one(c[n])) {
    std::vector<Coef> lower(c.begin(), c.begin() + n);
    return std::max(log2i(n), need_depth(lower));
  }
  return ps_depth(n);
}

class PsEngine
{
public:
  PsEngine(Evaluator& ev, Basis basis, const SimCiphertext& x, int baby_log)
      : ev_(ev), basis_(basis), s_(baby_log)
  {
    pw_.emplace(1, x);
  }

  struct Part
  {
    std::optional<SimCiphertext> ct;
    Coef c0{0.0};
  };

  Part eval(std::vector<Coef> c, int r)
  {
    int n = lead_index(c);
    c.resize(n + 1);
    if (n == 0)
      return Part{std::nullopt, c[0]};
    if (need_depth(c) > r)
      throw std::logic_error("polynomial evaluation: depth budget too small");

    if (pow2(n) && is_one(c[n]) && log2i(n) <= r) {
      std::vector<Coef> lower(c.begin(), c.begin() + n);
      return sum(eval(lower, r), Part{power(n), Coef{0.0}});
    }
    if (n <= (1 << (r - 1)) && n <= (1 << s_))
      return direct(c);

    int g = 1 << (ps_depth(n) - 1);
    auto [lo, hi] = split(c, g);
    return sum(eval(lo, r), times_power(g, eval(hi, r - 1)));
  }

  SimCiphertext finish(const Part& p, int level)
  {
    SimCiphertext out;
    if (p.ct) {
      out = add_coef(*p.ct, p.c0);
    } else {
      Coef v = p.c0;
      out = ev_.trivial(v, pw_.at(1).level);
    }
    return ev_.drop_level(out, level);
  }

private:
  const SimCiphertext& power(int i)
  {
    auto it = pw_.find(i);
    if (it != pw_.end())
      return it->second;
    SimCiphertext r;
    int a = pow2(i) ? i / 2 : 1 << log2i(i);
    int b = i - a;
    SimCiphertext x = power(a), y = power(b);
    ev_.align(x, y);
    SimCiphertext prod = ev_.cc_mult(x, y);
    if (basis_ == Basis::monomial) {
      r = prod;
    } else {
      // T_{a+b} = 2 T_a T_b - T_{a-b}
      r = ev_.add(prod, prod);
      if (a == b) {
        r = ev_.add_const(r, -1.0);
      } else {
        SimCiphertext z = power(a - b);
        r = ev_.sub(r, ev_.drop_level(z, r.level));
      }
    }
    return pw_.emplace(i, std::move(r)).first->second;
  }

  SimCiphertext mul_coef(const SimCiphertext& ct, const Coef& c)
  {
    if (is_one(c))
      return ct;
    if (c.size() == 1)
      return ev_.mult_const(ct, c[0]);
    return ev_.pc_mult(SimPlaintext{c, ev_.params().log_scale}, ct);
  }

  SimCiphertext add_coef(const SimCiphertext& ct, const Coef& c)
  {
    if (is_zero(c))
      return ct;
    if (c.size() == 1)
      return ev_.add_const(ct, c[0]);
    return ev_.add_plain(ct, SimPlaintext{c, ct.log_scale});
  }

  SimCiphertext add_ct(SimCiphertext a, SimCiphertext b)
  {
    ev_.align(a, b);
    return ev_.add(a, b);
  }

  Part sum(Part a, Part b)
  {
    Part r;
    r.c0 = coef_axpy(a.c0, 1.0, b.c0);
    if (a.ct && b.ct)
      r.ct = add_ct(*a.ct, *b.ct);
    else if (a.ct)
      r.ct = a.ct;
    else
      r.ct = b.ct;
    return r;
  }

  Part direct(const std::vector<Coef>& c)
  {
    Part r;
    r.c0 = c[0];
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (is_zero(c[i]))
        continue;
      SimCiphertext t = mul_coef(power(static_cast<int>(i)), c[i]);
      r.ct = r.ct ? add_ct(*r.ct, t) : t;
    }
    return r;
  }

  Part times_power(int g, const Part& h)
  {
    Part r;
    const SimCiphertext& bg = power(g);
    if (h.ct) {
      SimCiphertext x = bg, y = *h.ct;
      ev_.align(x, y);
      r.ct = ev_.cc_mult(x, y);
    }
    if (!is_zero(h.c0)) {
      SimCiphertext t = mul_coef(bg, h.c0);
      r.ct = r.ct ? add_ct(*r.ct, t) : t;
    }
    return r;
  }

  std::pair<std::vector<Coef>, std::vector<Coef>>
  split(const std::vector<Coef>& c, int g)
  {
    const int n = static_cast<int>(c.size()) - 1;
    std::vector<Coef> lo(c.begin(), c.begin() + g);
    std::vector<Coef> hi(c.begin() + g, c.end());
    if (basis_ == Basis::chebyshev) {
      // T_g * T_m = (T_{g+m} + T_{g-m}) / 2
      for (int m = 1; g + m <= n; ++m) {
        hi[m] = coef_axpy(Coef{0.0}, 2.0, c[g + m]);
        lo[g - m] = coef_axpy(lo[g - m], -1.0, c[g + m]);
      }
    }
    return {lo, hi};
  }

  Evaluator& ev_;
  Basis basis_;
  int s_;
  std::map<int, SimCiphertext> pw_;
};

// Baby-step size minimizing ciphertext products, found by a dry run on a
// one-slot context.
int choose_baby_log(const std::vector<Coef>& c, Basis basis, int depth)
{
  std::vector<Coef> proxy(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    proxy[i] = Coef{is_zero(c[i]) ? 0.0
                                  : (is_one(c[i]) ? 1.0 : 0.5 + 1e-3 * i)};
  SimParams sp;
  sp.slot_count = 1;
  sp.top_level = depth + 1;
  sp.boot_level = 1;
  sp.noise_bits.reset();
  int best = 0;
  std::uint64_t best_cost = ~0ULL;
  for (int s = 0; s <= std::max(depth, 1); ++s) {
    Evaluator dry(sp);
    SimCiphertext x = dry.trivial(std::vector<double>{0.5}, depth);
    PsEngine eng(dry, basis, x, s);
    eng.finish(eng.eval(proxy, depth), 0);
    if (dry.ledger().cc_mults < best_cost) {
      best_cost = dry.ledger().cc_mults;
      best = s;
    }
  }
  return best;
}

SimCiphertext run_ps(Evaluator& ev, const std::vector<Coef>& c, Basis basis,
                     const SimCiphertext& x, int depth)
{
  if (x.level < depth)
    throw NeedsBootstrap("polynomial evaluation needs more levels");
  int s = choose_baby_log(c, basis, depth);
  PsEngine eng(ev, basis, x, s);
  return eng.finish(eng.eval(c, depth), x.level - depth);
}

} // namespace

int ps_min_depth(const std::vector<std::vector<double>>& coeffs)
{
  return need_depth(coeffs);
}

SimCiphertext ps_eval_ct(Evaluator& ev, const ApproxPoly& p,
                         const SimCiphertext& ct, Domain domain)
{
  if (p.coeffs.empty())
    throw std::invalid_argument("empty polynomial");
  const int depth = ps_depth(p.degree());
  std::vector<Coef> c;
  SimCiphertext x = ct;
  Basis basis = Basis::monomial;
  if (domain == Domain::normalized) {
    if (p.basis != Basis::chebyshev)
      throw std::invalid_argument(
          "normalized-domain evaluation needs a Chebyshev series");
    basis = Basis::chebyshev;
    for (double a : p.coeffs)
      c.push_back(Coef{a});
  } else {
    Series m = centered_monomial(p);
    double center = 0.5 * (p.lo + p.hi);
    x = ev.add_const(ct, -center);
    for (double a : m)
      c.push_back(Coef{a});
  }
  c.resize(p.coeffs.size(), Coef{0.0});
  return run_ps(ev, c, basis, x, depth);
}

SimCiphertext ps_eval_pt_coeffs(Evaluator& ev,
                                const std::vector<SimPlaintext>& coeff_pts,
                                const SimCiphertext& ct, Basis basis,
                                std::optional<int> depth)
{
  if (coeff_pts.empty())
    throw std::invalid_argument("no coefficient plaintexts");
  std::vector<Coef> c;
  for (const auto& pt : coeff_pts) {
    if (pt.slots.size() != ct.slots.size())
      throw std::invalid_argument("coefficient plaintext length mismatch");
    if (pt.log_scale != ev.params().log_scale)
      throw std::invalid_argument("coefficient plaintext not at full scale");
    c.push_back(pt.slots);
  }
  int r = depth.value_or(ps_depth(static_cast<int>(c.size()) - 1));
  if (r < need_depth(c))
    throw std::invalid_argument("requested depth below what the degree needs");
  return run_ps(ev, c, basis, ct, r);
}

SimCiphertext normalize_input(Evaluator& ev, const SimCiphertext& ct,
                              double lo, double hi)
{
  if (!(lo < hi))
    throw std::invalid_argument("interval must satisfy lo < hi");
  SimCiphertext r = ev.mult_const(ct, 2.0 / (hi - lo));
  return ev.add_const(r, -(lo + hi) / (hi - lo));
}

SimCiphertext normalize_input(Evaluator& ev, const SimCiphertext& ct,
                              const std::vector<double>& lo,
                              const std::vector<double>& hi)
{
  const std::size_t n = ct.slots.size();
  if (lo.size() != n || hi.size() != n)
    throw std::invalid_argument("per-slot interval length mismatch");
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lo[i] < hi[i]))
      throw std::invalid_argument("interval must satisfy lo < hi");
    a[i] = 2.0 / (hi[i] - lo[i]);
    b[i] = -(lo[i] + hi[i]) / (hi[i] - lo[i]);
  }
  SimCiphertext r = ev.pc_mult(SimPlaintext{a, ev.params().log_scale}, ct);
  return ev.add_plain(r, SimPlaintext{b, r.log_scale});
}

} // namespace fhellm
