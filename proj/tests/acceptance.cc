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
// Runs every acceptance criterion at its stated tolerance and time limit
// and prints one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fhellm/bitrev.h"
#include "fhellm/checks.h"
#include "test_util.h"

using namespace fhellm;

namespace {

struct Outcome
{
  bool passed = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what)
  {
    if (!ok) {
      passed = false;
      failures += " [failed: " + what + "]";
    }
  }
};

double p2(int e) { return std::ldexp(1.0, e); }

void pcmm_depth(Outcome& o)
{
  int worst = 0;
  for (int d : {2, 4, 8, 16})
    for (int ell = 0; ell <= 3; ++ell)
      for (bool naive : {true, false}) {
        PcmmCheckConfig cfg;
        cfg.d = d;
        cfg.ell = ell;
        cfg.naive = naive;
        MatmulCheckReport r = pcmm_check(cfg);
        o.require(r.level_drop == 1, "d=" + std::to_string(d) + " l=" +
                                         std::to_string(ell) + " drop " +
                                         std::to_string(r.level_drop));
        worst = std::max(worst, r.level_drop);
      }
  o.detail << "level drop " << worst << " for all d, l, both forms";
}

void pcmm_correct(Outcome& o)
{
  double ratio = 0;
  for (int d : {2, 4, 8, 16})
    for (int ell = 0; ell <= 3; ++ell) {
      PcmmCheckConfig cfg;
      cfg.d = d;
      cfg.ell = ell;
      cfg.naive = true;
      cfg.trials = 50;
      cfg.seed = 1000 * d + 10 * ell;
      double err = pcmm_check(cfg).max_err;
      double tol = d * p2(-38);
      o.require(err < tol, "d=" + std::to_string(d) + " l=" + std::to_string(ell));
      ratio = std::max(ratio, err / tol);
    }
  o.detail << "worst error / (d 2^-38) = " << ratio;
}

void bsgs_budget(Outcome& o)
{
  PcmmCheckConfig cfg;
  cfg.d = 16;
  cfg.split = BsgsSplit{4, 4};
  auto bsgs = pcmm_check(cfg).ct_rotations;
  cfg.naive = true;
  auto naive = pcmm_check(cfg).ct_rotations;
  o.require(bsgs == 6, "bsgs rotations");
  o.require(naive == 15, "naive rotations");
  o.detail << "bsgs " << bsgs << ", naive " << naive << " rotations";
}

void on_the_fly(Outcome& o)
{
  int blocks = 0;
  std::uint64_t max_rot = 0;
  for (int ell = 0; ell <= 2; ++ell) {
    Evaluator ev(matrix_params(8, std::nullopt, 0));
    ClearMatrix a = random_matrix(8, 8, 70 + ell);
    BsgsSplit sp = BsgsSplit::defaults(8);
    PcmmPlan eager = make_pcmm_plan(ev, a, ell, sp, false);
    PcmmPlan lazy = make_pcmm_plan(ev, a, ell, sp, true);
    o.require(lazy.table.empty(), "lazy plan holds a table");
    for (int j = 0; j < sp.g; ++j)
      for (int i = 0; i < sp.b; ++i) {
        auto before = ev.ledger().pt_rotations;
        SimPlaintext got = derive_pt_block(ev, lazy, i, j);
        auto used = ev.ledger().pt_rotations - before;
        max_rot = std::max(max_rot, used);
        const SimPlaintext& want = eager.table.at(i + j * sp.b);
        o.require(got.slots == want.slots && got.log_scale == want.log_scale,
                  "block mismatch");
        o.require(used <= 2, "more than two plaintext rotations");
        ++blocks;
      }
  }
  o.detail << blocks << " blocks bitwise equal, at most " << max_rot
           << " plaintext rotations each";
}

void ccmm(Outcome& o)
{
  double err = 0;
  for (int d : {2, 4, 8}) {
    MatmulCheckReport r = ccmm_check({d, 5, std::nullopt, 7});
    o.require(r.level_drop == 3, "level drop d=" + std::to_string(d));
    o.require(r.max_err < 1e-9, "error d=" + std::to_string(d));
    err = std::max(err, r.max_err);
  }
  o.detail << "3 levels, worst error " << err;
}

void tau_identities(Outcome& o)
{
  int checks = 0;
  for (int d : {2, 4, 8, 16})
    for (int t = 0; t < 20; ++t) {
      ClearMatrix m = random_matrix(d, d, 100 * d + t);
      for (int k = 0; k < d; ++k) {
        o.require(tau(rot_row(m, k)) == rot_row(tau(m), k), "row identity");
        o.require(tau(rot_col(m, k)) == rot_row(rot_col(tau(m), k), -k),
                  "column identity");
        checks += 2;
      }
    }
  o.detail << checks << " identities checked exactly";
}

void sos_recon(Outcome& o)
{
  double worst = 0;
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    int deg = 2 * (1 + static_cast<int>(rng() % 8));
    std::vector<double> c = test::uniform(deg + 1, -1, 1, 5000 + t);
    c[deg] = 0.25 + std::abs(c[deg]);
    ApproxPoly p;
    p.basis = Basis::monomial;
    p.coeffs = c;
    worst = std::max(worst, test::sos_residual(p, split_sos(p)));
  }
  ApproxPoly e = chebyshev_fit(named_function("exp"), -32.78 / 4, 0, 16, "exp");
  double re = test::sos_residual(e, split_sos(e));
  o.require(worst < 1e-6, "random polynomials");
  o.require(re < 1e-6, "exp approximant");
  o.detail << "random worst " << worst << ", exp " << re;
}

void slim(Outcome& o)
{
  ApproxPoly p = chebyshev_fit(named_function("exp"), -32.78 / 4, 0, 16, "exp");
  for (int j : {1, 2}) {
    TreeOptions to;
    to.j = j;
    SosTree tree = build_tree(p, to);
    double err = 0, loss = -1e9;
    for (int t = 0; t < 4; ++t) {
      std::vector<double> xs = test::uniform(8, p.lo, p.hi, 40 + t);
      for (bool fused : {false, true}) {
        SlimEvalReport ex = slim_eval_points(tree, xs, fused);
        for (std::size_t i = 0; i < xs.size(); ++i)
          err = std::max(err, std::abs(ex.outputs[i] - eval_clear(p, xs[i])));
        o.require(ex.levels_used == (fused ? tree.k : tree.k + 1),
                  "level count j=" + std::to_string(j));
        o.require(ex.main_rotations == static_cast<std::uint64_t>(j),
                  "rotation count j=" + std::to_string(j));

        SimParams sp;
        sp.slot_count = std::size_t{8} << j;
        sp.top_level = sp.boot_level = tree.k + 2;
        sp.noise_bits = 30;
        sp.seed = 100 + t;
        SlimEvalReport nz = slim_eval_points(tree, xs, fused, sp);
        double dn = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
          dn = std::max(dn, std::abs(nz.outputs[i] - ex.outputs[i]));
        loss = std::max(loss, std::log2(dn / p2(-30)));
      }
    }
    o.require(err < p2(-30), "exact error j=" + std::to_string(j));
    o.require(loss <= j + 2, "noisy loss j=" + std::to_string(j));
    o.detail << "j=" << j << ": exact 2^" << std::log2(err) << ", loss "
             << loss << " bits; ";
  }
}

void softmax(Outcome& o)
{
  SoftmaxEvalConfig cfg;
  cfg.softmax.d = 128;
  SoftmaxKernel kernel(cfg.softmax);
  o.require(kernel.exp_poly().degree() == 15, "exp degree");
  o.require(kernel.tree(cfg.softmax.k - 1).k == 7, "inverse sqrt degree 128");
  SoftmaxEvalReport ex = softmax_eval(cfg);
  cfg.noise_bits = 30;
  SoftmaxEvalReport nz = softmax_eval(cfg);
  for (const auto* r : {&ex, &nz}) {
    o.require(r->max_err < p2(-12), "error");
    o.require(r->main_levels_used == 8, "main levels");
    o.require(r->main_bootstraps == 0, "main bootstraps");
    o.require(static_cast<std::uint64_t>(r->aux_bootstraps) ==
                  r->ledger.bootstraps,
              "bootstraps outside the auxiliary track");
  }
  o.detail << "error 2^" << std::log2(ex.max_err) << " exact, 2^"
           << std::log2(nz.max_err) << " at p=30; main levels "
           << ex.main_levels_used << ", main bootstraps " << ex.main_bootstraps
           << ", aux bootstraps " << ex.aux_bootstraps;
}

void prefill(Outcome& o)
{
  double diff = 0, dec = 0;
  ToyModelConfig wide;
  wide.d_model = 16;
  wide.n_heads = 2;
  wide.n_layers = 2;
  for (const ToyModelConfig& mc : {ToyModelConfig{}, wide}) {
    PrefillEquivConfig cfg;
    cfg.model = mc;
    cfg.split = {32, 24, 8};
    cfg.all_splits = true;
    cfg.decode_steps = 8;
    PrefillEquivReport r = prefill_equiv(cfg);
    o.require(r.splits_checked == 32, "split count");
    o.require(r.passed(1e-6), "equivalence");
    diff = std::max(diff, r.max_diff);
    dec = std::max(dec, r.decode_max_diff);
  }
  o.detail << "32 splits, prefill diff " << diff << ", 8 decode steps diff "
           << dec;
}

void bitrev(Outcome& o)
{
  int n = 0;
  for (const auto& r : bitrev_properties(11, 2)) {
    o.require(r.passed, r.name);
    ++n;
  }
  o.detail << n << " properties; the g identity uses an 8-bit reversal "
           << "(i + 16j reaches 255)";
}

void scaled_boot(Outcome& o)
{
  SimParams sp;
  sp.slot_count = 8;
  sp.noise_bits = 30;
  Evaluator ev(sp);
  std::vector<double> beta = {1, 2, 4, 64, 1, 2, 4, 64};
  std::vector<double> x = {0.5, -2, 2, 32, 2, -4, 8, 128};
  BoundsProfile prof{beta};
  // noise-free input so that the slots sit exactly at beta / 2 and 2 beta
  SimCiphertext r = ev.scaled_bootstrap(ev.trivial(x, 0), prof);
  double worst = 0;
  for (int i = 0; i < 8; ++i) {
    double bits = std::log2(r.noise[i] / ev.eps());
    double want = i < 4 ? std::log2(beta[i]) : std::log2(beta[i]) + 2;
    worst = std::max(worst, std::abs(bits - want));
  }
  o.require(worst < 1e-12, "noise bits");
  o.require(r.level == sp.boot_level - 1, "output level");
  o.detail << "in-bound noise beta 2^-p, slots at 2 beta gain log2 beta + 2 "
           << "bits (deviation " << worst << ")";
}

void sqrt_encoding(Outcome& o)
{
  Evaluator ev(test::params(4, 30));
  SimPlaintext a = ev.encode_sqrt(std::vector<double>{2, -1});
  SimPlaintext b = ev.encode_sqrt(std::vector<double>{3, 0.5});
  const auto rescales = ev.ledger().rescales;
  SimPlaintext c = ev.pt_pt_mult_sqrt_scale(a, b);
  o.require(c.log_scale == ev.params().log_scale, "product scale");
  o.require(ev.ledger().rescales == rescales, "rescale count");
  o.require(std::abs(c.slots[0] - 6) < 1e-6 && std::abs(c.slots[1] + 0.5) < 1e-6,
            "product values");
  o.detail << "scale 2^" << c.log_scale << ", rescales +"
           << ev.ledger().rescales - rescales;
}

void attention(Outcome& o)
{
  AttentionDemoConfig cfg;
  cfg.d = 8;
  AttentionDemoReport ex = attention_demo(cfg);
  cfg.noise_bits = 30;
  AttentionDemoReport nz = attention_demo(cfg);
  o.require(ex.max_err < p2(-10), "exact error");
  o.require(nz.max_err < p2(-8), "noisy error");
  o.require(ex.main_bootstraps == 0 && nz.main_bootstraps == 0,
            "main-track bootstraps");
  o.detail << "error 2^" << std::log2(ex.max_err) << " exact, 2^"
           << std::log2(nz.max_err) << " at p=30; main bootstraps "
           << ex.main_bootstraps;
}

struct Criterion
{
  const char* name;
  double limit_s;
  std::function<void(Outcome&)> run;
};

} // namespace

int main()
{
  const Criterion all[] = {
      {"PCMM depth", 1, pcmm_depth},
      {"PCMM correctness", 10, pcmm_correct},
      {"BSGS rotation budget", 1, bsgs_budget},
      {"On-the-fly block equivalence", 1, on_the_fly},
      {"CCMM baseline", 5, ccmm},
      {"Tau identities", 5, tau_identities},
      {"SOS reconstruction", 30, sos_recon},
      {"Slim polynomial evaluation", 30, slim},
      {"Two-track softmax", 60, softmax},
      {"Chunked prefill", 30, prefill},
      {"Bit-reverse suite", 10, bitrev},
      {"Scaled bootstrap", 1, scaled_boot},
      {"Square-root encoding", 1, sqrt_encoding},
      {"Encrypted attention", 60, attention},
  };
  int failed = 0, idx = 0;
  for (const auto& c : all) {
    ++idx;
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.passed = false;
      o.failures += std::string(" [exception: ") + e.what() + "]";
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    o.require(secs < c.limit_s, "time limit");
    if (!o.passed)
      ++failed;
    std::printf("%s %2d %s: %s%s (%.2fs)\n", o.passed ? "PASS" : "FAIL", idx,
                c.name, o.detail.str().c_str(), o.failures.c_str(), secs);
  }
  std::printf("%d/%d criteria passed\n", idx - failed, idx);
  return failed == 0 ? 0 : 1;
}
