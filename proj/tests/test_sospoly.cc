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
#include <doctest.h>

#include <cmath>
#include <array>
#include <random>

#include "fhellm/checks.h"
#include "fhellm/sospoly.h"
#include "test_util.h"

using namespace fhellm;
using fhellm::test::params;
using fhellm::test::uniform;

namespace {

ApproxPoly mono(std::vector<double> c, double lo = -1, double hi = 1)
{
  ApproxPoly p;
  p.basis = Basis::monomial;
  p.coeffs = std::move(c);
  p.lo = lo;
  p.hi = hi;
  return p;
}

ApproxPoly exp16()
{
  return chebyshev_fit(named_function("exp"), -32.78 / 4, 0, 16, "exp");
}

} // namespace

TEST_CASE("max_neg of simple quadratics")
{
  CHECK(max_neg(mono({-1, 0, 1})) == doctest::Approx(1).epsilon(1e-10));
  CHECK(max_neg(mono({1, 0, 1})) == doctest::Approx(-1).epsilon(1e-10));
  CHECK_THROWS(max_neg(mono({0, 0, 0, 1})));
  CHECK_THROWS(max_neg(mono({0, 0, -1})));
}

TEST_CASE("max_neg of random degree-8 polynomials")
{
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::vector<double> c = uniform(9, -1, 1, 100 + s);
    c[8] = 0.5 + std::abs(c[8]);
    ApproxPoly p = mono(c, -3, 3);
    double m = max_neg(p);
    double lowest = 1e300;
    for (int i = 0; i <= 200000; ++i) {
      double x = -6 + 12.0 * i / 200000;
      lowest = std::min(lowest, eval_clear(p, x) + m);
    }
    CHECK(lowest >= -1e-9);
    CHECK(lowest <= 1e-6);
  }
}

TEST_CASE("roots of known polynomials")
{
  RootSet r = find_roots(mono({1, 0, 1}));
  REQUIRE(r.roots.size() == 2);
  for (auto z : r.roots) {
    CHECK(std::abs(z.real()) < 1e-12);
    CHECK(std::abs(std::abs(z.imag()) - 1) < 1e-12);
  }
  // (x-1)^2 (x^2+4) = x^4 - 2x^3 + 5x^2 - 8x + 4
  RootSet q = find_roots(mono({4, -8, 5, -2, 1}));
  REQUIRE(q.roots.size() == 4);
  int near_one = 0, near_2i = 0;
  for (auto z : q.roots) {
    if (std::abs(z - std::complex<double>(1, 0)) < 1e-6)
      ++near_one;
    if (std::abs(std::abs(z.imag()) - 2) < 1e-6 && std::abs(z.real()) < 1e-6)
      ++near_2i;
  }
  CHECK(near_one == 2);
  CHECK(near_2i == 2);
}

TEST_CASE("roots of the shifted exp approximant pair up")
{
  ApproxPoly p = exp16();
  SosSplit s = split_sos(p);
  ApproxPoly shifted = to_monomial(p);
  shifted.coeffs[0] += s.m;
  RootSet r = find_roots(shifted);
  for (auto z : r.roots) {
    double best = 1e300;
    for (auto w : r.roots)
      best = std::min(best, std::abs(z - std::conj(w)));
    CHECK(best < 1e-6 * std::max(1.0, std::abs(z)));
  }
}

TEST_CASE("split of x^2 - 1")
{
  SosOptions o;
  o.margin = 0;
  o.alpha = 0;
  o.beta = 1;
  SosSplit s = split_sos(mono({-1, 0, 1}), {}, o);
  CHECK(s.m == doctest::Approx(1));
  ApproxPoly u = to_monomial(s.u), v = to_monomial(s.v);
  CHECK(std::abs(std::abs(eval_clear(u, 0.7)) - 0.7) < 1e-9);
  CHECK(std::abs(eval_clear(v, 0.7)) < 1e-9);
}

TEST_CASE("two-squares identity on scalars")
{
  // (a^2+b^2)(c^2+d^2) with a=1, b=0, c=0, d=1
  const double a = 1, b = 0, c = 0, d = 1;
  double u = M_SQRT1_2 * (a * c - b * d) + M_SQRT1_2 * (a * d + b * c);
  double v = M_SQRT1_2 * (a * c - b * d) - M_SQRT1_2 * (a * d + b * c);
  CHECK(u * u + v * v == doctest::Approx(1));
}

TEST_CASE("decomposition reconstructs the polynomial")
{
  ApproxPoly p = exp16();
  CHECK(test::sos_residual(p, split_sos(p)) < 1e-7);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    int deg = 2 * (1 + static_cast<int>(rng() % 8));
    std::vector<double> c = uniform(deg + 1, -1, 1, 1000 + t);
    c[deg] = 0.25 + std::abs(c[deg]);
    ApproxPoly q = mono(c);
    SosSplit s = split_sos(q);
    CHECK(s.u.degree() <= deg / 2);
    CHECK(s.v.degree() <= deg / 2);
    CHECK(test::sos_residual(q, s) < 1e-6);
  }
}

TEST_CASE("ordering search")
{
  ApproxPoly p = exp16();
  RootOrdering one = search_stable(p, 1);
  SosSplit def = split_sos(p);
  SosSplit first = split_sos(p, one);
  CHECK(split_score(first) == doctest::Approx(split_score(def)));
  RootOrdering best = search_stable(p, 16, 3);
  SosSplit chosen = split_sos(p, best);
  CHECK(split_score(chosen) <= split_score(def) * (1 + 1e-12));

  double supp = 0;
  for (int i = 0; i <= 1000; ++i)
    supp = std::max(supp, std::abs(eval_clear(p, p.from_t(-1 + i / 500.0))));
  double bound = std::sqrt(supp + chosen.m) * (1 + 1e-9);
  for (int i = 0; i <= 1000; ++i) {
    double x = p.from_t(-1 + i / 500.0);
    CHECK(std::abs(eval_clear(chosen.u, x)) <= bound);
    CHECK(std::abs(eval_clear(chosen.v, x)) <= bound);
  }
}

TEST_CASE("tree shapes")
{
  ApproxPoly p = exp16();
  TreeOptions o;
  o.j = 0;
  SosTree t0 = build_tree(p, o);
  REQUIRE(t0.levels.size() == 1);
  CHECK(t0.levels[0][0].u.degree() == 16);
  CHECK(std::abs(tree_eval_clear(t0, -1.3) - eval_clear(p, -1.3)) < 1e-12);

  ApproxPoly x4 = to_chebyshev(mono({0, 0, 0, 0, 1}));
  o.j = 1;
  SosTree t = build_tree(x4, o);
  CHECK(t.k == 2);
  CHECK(std::abs(t.levels[0][0].m) < 1e-5);
  std::vector<double> a, b;
  for (double x : {-0.9, -0.3, 0.2, 0.8}) {
    a.push_back(std::abs(eval_clear(t.levels[1][0].u, x)));
    b.push_back(std::abs(eval_clear(t.levels[1][1].u, x)));
  }
  // with the default mixing both children equal x^2 / sqrt 2 up to sign
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] * a[i] + b[i] * b[i] ==
          doctest::Approx(std::pow(std::array{-0.9, -0.3, 0.2, 0.8}[i], 4))
              .epsilon(1e-4));
  o.split.alpha = 0;
  o.split.beta = 1;
  SosTree tb = build_tree(x4, o);
  for (double x : {-0.9, 0.5}) {
    double u = eval_clear(tb.levels[1][0].u, x), v = eval_clear(tb.levels[1][1].u, x);
    CHECK(std::min(std::abs(u), std::abs(v)) < 1e-2);
    CHECK(std::max(std::abs(u), std::abs(v)) ==
          doctest::Approx(x * x).epsilon(1e-4));
  }

  CHECK_THROWS(build_tree(chebyshev_fit(named_function("exp"), -1, 0, 12), o));
}

TEST_CASE("exp tree residuals")
{
  TreeOptions o;
  o.j = 2;
  SosTree t = build_tree(exp16(), o);
  CHECK(t.k == 4);
  REQUIRE(t.leaves().size() == 4);
  for (const auto& leaf : t.leaves())
    CHECK(leaf.u.degree() == 4);
  CHECK(tree_residual(t) < 1e-6);
  for (double x : uniform(20, -8, 0, 9))
    CHECK(std::abs(tree_eval_clear(t, x) - eval_clear(exp16(), x)) < 1e-9);
}

TEST_CASE("slim evaluation of x^4")
{
  ApproxPoly x4 = to_chebyshev(mono({0, 0, 0, 0, 1}));
  TreeOptions o;
  o.j = 1;
  SosTree t = build_tree(x4, o);
  SlimEvalReport r = slim_eval_points(t, {0.5, -0.5}, false);
  CHECK(r.outputs[0] == doctest::Approx(0.0625).epsilon(1e-9));
  CHECK(r.outputs[1] == doctest::Approx(0.0625).epsilon(1e-9));
  CHECK(r.levels_used == 3);
  CHECK(r.total_levels == 4);
  CHECK(r.main_rotations == 1);
  SlimEvalReport f = slim_eval_points(t, {0.5, -0.5}, true);
  CHECK(f.outputs[0] == doctest::Approx(0.0625).epsilon(1e-9));
  CHECK(f.levels_used == 2);
  CHECK(f.total_levels == 3);
}

TEST_CASE("slim evaluation of the exp approximant")
{
  ApproxPoly p = exp16();
  TreeOptions o;
  o.j = 2;
  SosTree t = build_tree(p, o);
  std::vector<double> xs = uniform(8, p.lo, p.hi, 10);
  for (bool fused : {false, true}) {
    SlimEvalReport r = slim_eval_points(t, xs, fused);
    for (std::size_t i = 0; i < xs.size(); ++i)
      CHECK(std::abs(r.outputs[i] - eval_clear(p, xs[i])) < std::ldexp(1.0, -30));
    CHECK(r.levels_used == (fused ? 4 : 5));
    CHECK(r.total_levels == r.levels_used + 1);
    CHECK(r.main_rotations == 2);
  }

  // the main loop alone: j rotations, k+1 levels
  Evaluator ev(params(64, {}, 12, 12));
  std::vector<double> msg(64);
  for (std::size_t s = 0; s < msg.size(); ++s)
    msg[s] = xs[s % 8];
  SimCiphertext in = prepare_slim_input(ev, ev.encrypt(msg), t, 3, false);
  const auto rot0 = ev.ledger().ct_rotations;
  SimCiphertext out = slim_eval(ev, t, in, 3, false);
  CHECK(ev.ledger().ct_rotations - rot0 == 2);
  CHECK(in.level - out.level == 5);

  Evaluator small(params(16, {}, 12, 12));
  SimCiphertext tiny = small.encrypt(std::vector<double>(16, -1.0));
  CHECK_THROWS(slim_eval(small, t, tiny, 3, false));
}

TEST_CASE("replication fills the slot blocks")
{
  Evaluator ev(params(16));
  std::vector<double> v(16, 0.0);
  v[0] = 1;
  v[1] = 2;
  v[2] = 3;
  v[3] = 4;
  SimCiphertext r = replicate_slim(ev, ev.encrypt(v), 2, 2);
  for (int s = 0; s < 16; ++s)
    CHECK(r.slots[s] == v[s % 4]);
  CHECK(ev.ledger().ct_rotations == 2);
  CHECK(ev.ledger().rescales == 0);
}

TEST_CASE("noisy slim evaluation loses few bits")
{
  ApproxPoly p = exp16();
  TreeOptions o;
  o.j = 2;
  SosTree t = build_tree(p, o);
  std::vector<double> xs = uniform(8, p.lo, p.hi, 11);
  SimParams sp = params(64, 30, 12, 12);
  SlimEvalReport noisy = slim_eval_points(t, xs, true, sp);
  SlimEvalReport exact = slim_eval_points(t, xs, true);
  double err = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    err = std::max(err, std::abs(noisy.outputs[i] - exact.outputs[i]));
  CHECK(std::log2(err / std::ldexp(1.0, -30)) <= o.j + 2);
}
