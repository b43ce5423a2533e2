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

#include "fhellm/polyapprox.h"
#include "test_util.h"

using namespace fhellm;
using fhellm::test::max_diff;
using fhellm::test::params;
using fhellm::test::uniform;

namespace {

const RangeTable ranges;

double exp_lo() { return -ranges.softmax_M / 4; }

std::vector<double> clear_eval(const ApproxPoly& p, const std::vector<double>& x)
{
  std::vector<double> y;
  for (double v : x)
    y.push_back(eval_clear(p, v));
  return y;
}

} // namespace

TEST_CASE("fit reproduces a line")
{
  auto id = [](double x) { return x; };
  ApproxPoly p = chebyshev_fit(id, -3, 7, 1);
  CHECK(sup_error(p, id) < 1e-12);
  CHECK(p.degree() == 1);
  CHECK_THROWS_AS(chebyshev_fit([](double x) { return std::sqrt(x); }, -1, 1, 2),
                  std::domain_error);
  CHECK_THROWS(chebyshev_fit(id, 1, 1, 2));
}

TEST_CASE("exp and inverse square root fits")
{
  auto e = named_function("exp");
  ApproxPoly p = chebyshev_fit(e, exp_lo(), 0, 15, "exp");
  CHECK(sup_error(p, e) < std::ldexp(1.0, -13));
  CHECK(std::abs(eval_clear(p, 0.0) - 1) < std::ldexp(1.0, -13));

  auto inv = named_function("invsqrt");
  ApproxPoly q =
      chebyshev_fit(inv, ranges.invsqrt_lo, ranges.invsqrt_hi, 128, "invsqrt");
  CHECK(sup_error(q, inv) < std::ldexp(1.0, -12));
  CHECK_THROWS(named_function("tanh"));
}

TEST_CASE("doubling the degree never hurts")
{
  auto e = named_function("exp");
  auto s = named_function("silu");
  double pe = 1e9, ps = 1e9;
  for (int deg = 2; deg <= 64; deg *= 2) {
    double ee = sup_error(chebyshev_fit(e, exp_lo(), 0, deg), e);
    double es = sup_error(chebyshev_fit(s, -16, 16, deg), s);
    CHECK(ee <= pe * (1 + 1e-9) + 1e-15);
    CHECK(es <= ps * (1 + 1e-9) + 1e-15);
    pe = ee;
    ps = es;
  }
}

TEST_CASE("clear evaluation and basis conversion")
{
  ApproxPoly c;
  c.coeffs = {2.5};
  CHECK(eval_clear(c, 0.3) == 2.5);
  for (int deg = 1; deg <= 16; ++deg) {
    ApproxPoly p =
        chebyshev_fit(named_function("silu"), -4, 4, deg);
    ApproxPoly m = to_monomial(p);
    ApproxPoly back = to_chebyshev(m);
    CHECK(m.basis == Basis::monomial);
    for (double x : uniform(20, -4, 4, deg)) {
      CHECK(std::abs(eval_clear(p, x) - eval_clear(m, x)) < 1e-10);
      CHECK(std::abs(eval_clear(p, x) - eval_clear(back, x)) < 1e-10);
    }
  }
}

TEST_CASE("evaluation depth is ceil(log2(degree + 1))")
{
  CHECK(ps_depth(15) == 4);
  CHECK(ps_depth(16) == 5);
  CHECK(ps_depth(1) == 1);
  for (int deg = 1; deg <= 129; ++deg) {
    Evaluator ev(params(16, {}, 12));
    ApproxPoly p = chebyshev_fit(named_function("exp"), -1, 0, deg);
    SimCiphertext ct = ev.encrypt(uniform(16, -1, 0, deg));
    SimCiphertext r = ps_eval_ct(ev, p, ct);
    CHECK(ct.level - r.level == ps_depth(deg));
  }
}

TEST_CASE("homomorphic evaluation matches the clear polynomial")
{
  Evaluator ev(params(4));
  ApproxPoly id;
  id.basis = Basis::monomial;
  id.coeffs = {0, 1};
  SimCiphertext ct = ev.encrypt(std::vector<double>{0.1, 0.2});
  SimCiphertext r = ps_eval_ct(ev, id, ct);
  CHECK(max_diff(r.slots, ct.slots) < 1e-15);
  CHECK(ct.level - r.level == 1);

  ApproxPoly p = chebyshev_fit(named_function("exp"), exp_lo(), 0, 15);
  Evaluator e2(params(64));
  std::vector<double> x = uniform(64, exp_lo(), 0, 5);
  SimCiphertext y = ps_eval_ct(e2, p, e2.encrypt(x));
  CHECK(max_diff(y.slots, clear_eval(p, x)) < std::ldexp(1.0, -35));
  CHECK(e2.ledger().cc_mults <= 12);

  Evaluator e3(params(64, {}, 12));
  SimCiphertext low = e3.drop_level(e3.encrypt(x), 3);
  CHECK_THROWS_AS(ps_eval_ct(e3, p, low), NeedsBootstrap);
}

TEST_CASE("normalized domain evaluation")
{
  ApproxPoly p = chebyshev_fit(named_function("silu"), -16, 16, 31);
  Evaluator ev(params(32));
  std::vector<double> x = uniform(32, -16, 16, 6);
  SimCiphertext t = normalize_input(ev, ev.encrypt(x), -16, 16);
  SimCiphertext y = ps_eval_ct(ev, p, t, Domain::normalized);
  CHECK(max_diff(y.slots, clear_eval(p, x)) < 1e-9);
}

TEST_CASE("per-slot plaintext coefficients")
{
  Evaluator ev(params(8));
  std::vector<double> x = uniform(8, -1, 1, 7);
  SimCiphertext ct = ev.encrypt(x);

  ApproxPoly q;
  q.basis = Basis::monomial;
  q.coeffs = {0.5, -1, 2};
  std::vector<SimPlaintext> same;
  for (double c : q.coeffs)
    same.push_back(ev.encode_const(c));
  SimCiphertext a = ps_eval_pt_coeffs(ev, same, ct);
  SimCiphertext b = ps_eval_ct(ev, q, ct);
  CHECK(max_diff(a.slots, b.slots) < 1e-14);
  CHECK(a.level == b.level);

  // first half: 1 + x + x^2, second half: -x^2 + 3
  std::vector<SimPlaintext> two = {
      ev.encode(std::vector<double>{1, 1, 1, 1, 3, 3, 3, 3}),
      ev.encode(std::vector<double>{1, 1, 1, 1, 0, 0, 0, 0}),
      ev.encode(std::vector<double>{1, 1, 1, 1, -1, -1, -1, -1})};
  SimCiphertext r = ps_eval_pt_coeffs(ev, two, ct);
  for (int i = 0; i < 8; ++i) {
    double want = i < 4 ? 1 + x[i] + x[i] * x[i] : 3 - x[i] * x[i];
    CHECK(std::abs(r.slots[i] - want) < 1e-14);
  }

  std::vector<SimPlaintext> zero(3, ev.encode_const(0.0));
  SimCiphertext z = ps_eval_pt_coeffs(ev, zero, ct);
  CHECK(max_abs(z.slots) == 0);

  CHECK_THROWS(ps_eval_pt_coeffs(ev, {}, ct));
}

TEST_CASE("evaluation commutes with rotation")
{
  ApproxPoly p = chebyshev_fit(named_function("exp"), exp_lo(), 0, 15);
  Evaluator ev(params(16));
  SimCiphertext ct = ev.encrypt(uniform(16, exp_lo(), 0, 8));
  for (long k : {1, 5, 11}) {
    SimCiphertext a = ev.rotate(ps_eval_ct(ev, p, ct), k);
    SimCiphertext b = ps_eval_ct(ev, p, ev.rotate(ct, k));
    CHECK(max_diff(a.slots, b.slots) == 0);
  }
}
