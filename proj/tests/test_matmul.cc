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

#include "fhellm/checks.h"
#include "fhellm/matmul.h"
#include "test_util.h"

using namespace fhellm;
using fhellm::test::max_diff;
using fhellm::test::params;

namespace {

Evaluator exact_ev(int d) { return Evaluator(matrix_params(d, std::nullopt, 0)); }

} // namespace

TEST_CASE("ciphertext product costs three levels")
{
  Evaluator ev = exact_ev(4);
  ClearMatrix id = ClearMatrix::Identity(4, 4);
  PackedMatrix a = encrypt_logical(ev, id, 0), b = encrypt_logical(ev, id, 0);
  PackedMatrix c = ccmm_jkls(ev, a, b);
  CHECK(max_diff(decrypt_logical(ev, c), id) < 1e-12);
  CHECK(a.ct.level - c.ct.level == 3);

  Evaluator e2 = exact_ev(2);
  ClearMatrix x(2, 2), y(2, 2), want(2, 2);
  x << 1, 2, 3, 4;
  y << 5, 6, 7, 8;
  want << 19, 22, 43, 50;
  PackedMatrix p = ccmm_jkls(e2, encrypt_logical(e2, x, 0),
                             encrypt_logical(e2, y, 0));
  CHECK(max_diff(decrypt_logical(e2, p), want) < 1e-12);

  MatmulCheckReport r = ccmm_check({8, 3, std::nullopt, 1});
  CHECK(r.max_err < 1e-9);
  CHECK(r.level_drop == 3);
}

TEST_CASE("ciphertext product needs three levels")
{
  Evaluator ev = exact_ev(4);
  ClearMatrix m = random_matrix(4, 4, 1);
  PackedMatrix a = encrypt_logical(ev, m, 0);
  a.ct = ev.drop_level(a.ct, 2);
  CHECK_THROWS_AS(ccmm_jkls(ev, a, a), NeedsBootstrap);
}

TEST_CASE("plaintext-ciphertext product, identity weight")
{
  Evaluator ev = exact_ev(8);
  ClearMatrix id = ClearMatrix::Identity(8, 8);
  ClearMatrix b = random_matrix(8, 8, 2);
  PcmmPlan plan = make_pcmm_plan(ev, id, 0, BsgsSplit::defaults(8), false);
  PackedMatrix eb = encrypt_logical(ev, b, 1);
  PackedMatrix c = pcmm_depth1(ev, plan, eb);
  CHECK(c.tau_power == 0);
  CHECK(eb.ct.level - c.ct.level == 1);
  CHECK(max_diff(decrypt_matrix(ev, c), b) < 1e-12);
}

TEST_CASE("plaintext-ciphertext product for several tau powers")
{
  for (int ell : {0, 1, 2}) {
    PcmmCheckConfig cfg;
    cfg.ell = ell;
    cfg.naive = true;
    cfg.trials = 3;
    MatmulCheckReport r = pcmm_check(cfg);
    CHECK(r.max_err < 8 * std::ldexp(1.0, -38));
    CHECK(r.level_drop == 1);
  }
}

TEST_CASE("two by two product in the tau layout")
{
  Evaluator ev = exact_ev(2);
  ClearMatrix a(2, 2), b(2, 2), want(2, 2);
  a << 1, 0, 0, 2;
  b << 1, 2, 3, 4;
  want << 1, 8, 6, 2;
  PcmmPlan plan = make_pcmm_plan(ev, a, 1, {1, 2}, false);
  PackedMatrix c = pcmm_depth1(ev, plan, encrypt_logical(ev, b, 2));
  CHECK(max_diff(decrypt_matrix(ev, c), want) < 1e-12);
  CHECK(c.tau_power == 1);
}

TEST_CASE("broken tau chain is rejected")
{
  Evaluator ev = exact_ev(4);
  ClearMatrix a = random_matrix(4, 4, 3);
  PcmmPlan plan = make_pcmm_plan(ev, a, 0, BsgsSplit::defaults(4), false);
  PackedMatrix b = encrypt_logical(ev, a, 0);
  CHECK_THROWS_AS(pcmm_depth1(ev, plan, b), std::invalid_argument);
  CHECK_THROWS_AS(pcmm_bsgs(ev, plan, b), std::invalid_argument);
}

TEST_CASE("baby-step giant-step rotation budget")
{
  PcmmCheckConfig cfg;
  cfg.d = 16;
  cfg.split = BsgsSplit{4, 4};
  MatmulCheckReport r = pcmm_check(cfg);
  CHECK(r.ct_rotations == 6);
  CHECK(r.level_drop == 1);
  cfg.naive = true;
  CHECK(pcmm_check(cfg).ct_rotations == 15);

  cfg.naive = false;
  cfg.split = BsgsSplit{1, 16};
  r = pcmm_check(cfg);
  CHECK(r.ct_rotations == 15);
  CHECK(r.max_err < 1e-12);

  CHECK_THROWS_AS(BsgsSplit({3, 5}).validate(16), std::invalid_argument);
  CHECK(BsgsSplit::defaults(16).b == 4);
  CHECK(BsgsSplit::defaults(8).b * BsgsSplit::defaults(8).g == 8);
}

TEST_CASE("hoisted and direct forms agree")
{
  for (int ell : {0, 1, 2}) {
    Evaluator ev = exact_ev(16);
    ClearMatrix a = random_matrix(16, 16, 30 + ell);
    ClearMatrix b = random_matrix(16, 16, 40 + ell);
    PcmmPlan plan = make_pcmm_plan(ev, a, ell, {4, 4}, false);
    PackedMatrix eb = encrypt_logical(ev, b, ell + 1);
    ClearMatrix x = decrypt_matrix(ev, pcmm_depth1(ev, plan, eb));
    ClearMatrix y = decrypt_matrix(ev, pcmm_bsgs(ev, plan, eb));
    CHECK(max_diff(x, y) < 1e-13);
    CHECK(max_diff(y, tau_pow(a * b, ell)) < 16 * std::ldexp(1.0, -38));
  }
}

TEST_CASE("on-the-fly blocks match the eager table")
{
  for (int ell : {0, 1, 2}) {
    Evaluator ev = exact_ev(8);
    ClearMatrix a = random_matrix(8, 8, 50 + ell);
    BsgsSplit sp = BsgsSplit::defaults(8);
    PcmmPlan eager = make_pcmm_plan(ev, a, ell, sp, false);
    PcmmPlan lazy = make_pcmm_plan(ev, a, ell, sp, true);
    CHECK(lazy.table.empty());
    for (int j = 0; j < sp.g; ++j)
      for (int i = 0; i < sp.b; ++i) {
        const auto before = ev.ledger().pt_rotations;
        SimPlaintext p = derive_pt_block(ev, lazy, i, j);
        const auto used = ev.ledger().pt_rotations - before;
        CHECK(used <= 2);
        CHECK(unpack(p.slots, 8) == pt_block_matrix(eager, i, j));
        SimPlaintext q = pt_block(ev, eager, i, j);
        CHECK(unpack(q.slots, 8) == pt_block_matrix(eager, i, j));
      }
    CHECK_THROWS(derive_pt_block(ev, lazy, sp.b, 0));
  }
  Evaluator ev = exact_ev(8);
  ClearMatrix a = random_matrix(8, 8, 60);
  PcmmPlan lazy = make_pcmm_plan(ev, a, 0, BsgsSplit::defaults(8), true);
  CHECK(unpack(derive_pt_block(ev, lazy, 0, 0).slots, 8) == sigma(a));
}

TEST_CASE("on-the-fly and parallel products give the same result")
{
  PcmmCheckConfig cfg;
  cfg.d = 16;
  cfg.ell = 2;
  MatmulCheckReport base = pcmm_check(cfg);
  cfg.on_the_fly = true;
  MatmulCheckReport fly = pcmm_check(cfg);
  cfg.parallel = true;
  MatmulCheckReport par = pcmm_check(cfg);
  CHECK(fly.max_err < 1e-12);
  CHECK(par.max_err < 1e-12);
  CHECK(base.ct_rotations == fly.ct_rotations);
  CHECK(par.ledger.ct_rotations == fly.ledger.ct_rotations);
}

TEST_CASE("tau chain composes")
{
  Evaluator ev = exact_ev(8);
  ClearMatrix a1 = random_matrix(8, 8, 70), a2 = random_matrix(8, 8, 71);
  ClearMatrix b = random_matrix(8, 8, 72);
  BsgsSplit sp = BsgsSplit::defaults(8);
  PackedMatrix eb = encrypt_logical(ev, b, 3);
  PackedMatrix c2 = pcmm_bsgs(ev, make_pcmm_plan(ev, a1, 2, sp, false), eb);
  PackedMatrix c1 = pcmm_bsgs(ev, make_pcmm_plan(ev, a2, 1, sp, false), c2);
  CHECK(c1.tau_power == 1);
  CHECK(eb.ct.level - c1.ct.level == 2);
  CHECK(max_diff(decrypt_matrix(ev, c1), tau(a2 * a1 * b)) < 1e-12);
}

TEST_CASE("correctness across sizes and powers")
{
  for (int d : {2, 4, 8, 16})
    for (int ell : {0, 1, 2, 3}) {
      PcmmCheckConfig cfg;
      cfg.d = d;
      cfg.ell = ell;
      cfg.naive = true;
      cfg.trials = 50;
      cfg.seed = 100 * d + ell;
      CHECK(pcmm_check(cfg).max_err < d * std::ldexp(1.0, -38));
    }
}
