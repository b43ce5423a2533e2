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
#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fhellm/bitrev.h"
#include "fhellm/checks.h"
#include "fhellm/io.h"
#include "fhellm/pipeline.h"

using namespace fhellm;

namespace {

struct Globals
{
  std::string config;
  std::uint64_t seed = 0;
  bool json = false;
};

std::optional<int> noise_opt(int p)
{
  return p > 0 ? std::optional<int>(p) : std::nullopt;
}

// Parameters from --config if given, else the preset; --seed and an
// explicit --noise override either.
SimParams resolve(const Globals& g, SimParams preset, const CLI::Option* noise,
                  int noise_bits)
{
  SimParams sp = g.config.empty() ? preset : load_sim_params(g.config);
  sp.seed = g.seed;
  if (noise && noise->count() > 0)
    sp.noise_bits = noise_opt(noise_bits);
  sp.validate();
  return sp;
}

void emit(const Globals& g, const Json& j)
{
  if (g.json) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (const auto& [k, v] : j.items()) {
    if (v.is_string())
      std::cout << k << ": " << v.get<std::string>() << "\n";
    else
      std::cout << k << ": " << v.dump() << "\n";
  }
}

double log2_or_neg_inf(double x)
{
  return x > 0 ? std::log2(x) : -INFINITY;
}

Json bits(double err)
{
  double b = log2_or_neg_inf(err);
  return std::isfinite(b) ? Json(b) : Json(nullptr);
}

BsgsSplit parse_split(const std::string& s)
{
  auto comma = s.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("--split", "expected b,g");
  return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"fhellm: slot-level simulation of encrypted transformer "
               "kernels"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "simulator parameters (JSON)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_flag("--json", g.json, "machine-readable output");
  int status = 0;

  // pcmm-check
  auto* pcmm = app.add_subcommand("pcmm-check",
                                  "plaintext-ciphertext product vs clear");
  int pc_dim = 8, pc_ell = 0, pc_trials = 1, pc_noise = 0;
  std::string pc_split;
  bool pc_fly = false, pc_naive = false, pc_par = false;
  pcmm->add_option("--dim", pc_dim, "matrix dimension")->capture_default_str();
  pcmm->add_option("--tau-power", pc_ell, "output tau power")
      ->capture_default_str();
  pcmm->add_option("--split", pc_split, "baby,giant steps (default: balanced)");
  pcmm->add_flag("--on-the-fly", pc_fly, "derive plaintext blocks lazily");
  pcmm->add_flag("--naive", pc_naive, "d-1 rotation form");
  pcmm->add_flag("--parallel", pc_par, "parallel partial sums");
  pcmm->add_option("--trials", pc_trials)->capture_default_str();
  auto* pc_noise_opt =
      pcmm->add_option("--noise", pc_noise, "noise bits p (0: exact)");
  pcmm->callback([&] {
    PcmmCheckConfig c;
    c.d = pc_dim;
    c.ell = pc_ell;
    if (!pc_split.empty())
      c.split = parse_split(pc_split);
    c.on_the_fly = pc_fly;
    c.naive = pc_naive;
    c.parallel = pc_par;
    c.trials = pc_trials;
    c.seed = g.seed;
    c.params = resolve(g, matrix_params(pc_dim, std::nullopt, g.seed),
                       pc_noise_opt, pc_noise);
    MatmulCheckReport r = pcmm_check(c);
    Json j;
    j["dim"] = pc_dim;
    j["tau_power"] = pc_ell;
    j["max_abs_error"] = r.max_err;
    j["level_drop"] = r.level_drop;
    j["ct_rotations_per_product"] = r.ct_rotations;
    j["ledger"] = to_json(r.ledger);
    emit(g, j);
  });

  // ccmm-check
  auto* ccmm = app.add_subcommand("ccmm-check",
                                  "ciphertext-ciphertext product vs clear");
  int cc_dim = 8, cc_trials = 1, cc_noise = 0;
  ccmm->add_option("--dim", cc_dim)->capture_default_str();
  ccmm->add_option("--trials", cc_trials)->capture_default_str();
  auto* cc_noise_opt = ccmm->add_option("--noise", cc_noise, "noise bits p");
  ccmm->callback([&] {
    CcmmCheckConfig c;
    c.d = cc_dim;
    c.trials = cc_trials;
    c.seed = g.seed;
    c.params = resolve(g, matrix_params(cc_dim, std::nullopt, g.seed),
                       cc_noise_opt, cc_noise);
    MatmulCheckReport r = ccmm_check(c);
    Json j;
    j["dim"] = cc_dim;
    j["max_abs_error"] = r.max_err;
    j["level_drop"] = r.level_drop;
    j["ct_rotations_per_product"] = r.ct_rotations;
    j["ledger"] = to_json(r.ledger);
    emit(g, j);
  });

  // approx-fit
  auto* fit = app.add_subcommand("approx-fit", "Chebyshev interpolant");
  std::string fit_fn = "exp", fit_out;
  int fit_degree = 15;
  double fit_lo = -1, fit_hi = 1;
  fit->add_option("--fn", fit_fn, "exp | silu | invsqrt")
      ->capture_default_str();
  fit->add_option("--degree", fit_degree)->capture_default_str();
  fit->add_option("--lo", fit_lo)->capture_default_str();
  fit->add_option("--hi", fit_hi)->capture_default_str();
  fit->add_option("--out", fit_out, "write the polynomial here");
  fit->callback([&] {
    auto f = named_function(fit_fn);
    ApproxPoly p = chebyshev_fit(f, fit_lo, fit_hi, fit_degree, fit_fn);
    double err = sup_error(p, f);
    if (!fit_out.empty())
      write_text(fit_out, to_json(p).dump(2) + "\n");
    Json j;
    j["fn"] = fit_fn;
    j["degree"] = fit_degree;
    j["interval"] = {fit_lo, fit_hi};
    j["sup_error"] = err;
    j["sup_error_bits"] = bits(err);
    if (g.json)
      j["poly"] = to_json(p);
    emit(g, j);
  });

  // sos-decompose
  auto* sos = app.add_subcommand("sos-decompose",
                                 "recursive sum-of-squares tree");
  std::string sos_poly, sos_out;
  int sos_depth = 1, sos_trials = 1;
  sos->add_option("--poly", sos_poly, "polynomial JSON")->required();
  sos->add_option("--depth", sos_depth, "recursion depth j")
      ->capture_default_str();
  sos->add_option("--trials", sos_trials, "orderings tried per node")
      ->capture_default_str();
  sos->add_option("--out", sos_out, "write the tree here");
  sos->callback([&] {
    ApproxPoly p = approx_poly_from_json(Json::parse(read_text(sos_poly)));
    TreeOptions o;
    o.j = sos_depth;
    o.trials = sos_trials;
    o.seed = g.seed;
    SosTree t = build_tree(p, o);
    if (!sos_out.empty())
      write_text(sos_out, to_json(t).dump(2) + "\n");
    Json j;
    j["degree"] = 1 << t.k;
    j["depth"] = t.j;
    j["sign"] = t.sign;
    j["max_score"] = t.score();
    j["scores"] = t.scores;
    j["residual"] = tree_residual(t);
    if (g.json && sos_out.empty())
      j["tree"] = to_json(t);
    emit(g, j);
  });

  // slim-eval
  auto* slim = app.add_subcommand("slim-eval",
                                  "encrypted evaluation of a tree");
  std::string slim_tree, slim_inputs;
  bool slim_unfused = false;
  int slim_noise = 0;
  slim->add_option("--tree", slim_tree, "tree JSON")->required();
  slim->add_option("--inputs", slim_inputs, "CSV of evaluation points")
      ->required();
  slim->add_flag("--unfused", slim_unfused, "separate leaf scaling level");
  auto* slim_noise_opt = slim->add_option("--noise", slim_noise, "noise bits");
  slim->callback([&] {
    SosTree t = sos_tree_from_json(Json::parse(read_text(slim_tree)));
    std::vector<double> xs = values_from_csv(read_text(slim_inputs));
    std::optional<SimParams> sp;
    if (!g.config.empty() || slim_noise_opt->count() > 0) {
      SimParams preset;
      preset.top_level = std::max(preset.top_level, t.k + 2);
      preset.boot_level = preset.top_level;
      preset.noise_bits.reset();
      sp = resolve(g, preset, slim_noise_opt, slim_noise);
    }
    SlimEvalReport r = slim_eval_points(t, xs, !slim_unfused, sp);
    double err = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      err = std::max(err, std::abs(r.outputs[i] - r.reference[i]));
    Json j;
    j["inputs"] = xs;
    j["outputs"] = r.outputs;
    j["reference"] = r.reference;
    j["max_abs_error"] = err;
    j["levels_used"] = r.levels_used;
    j["total_levels"] = r.total_levels;
    j["main_rotations"] = r.main_rotations;
    j["ledger"] = to_json(r.ledger);
    emit(g, j);
  });

  // softmax-eval
  auto* smx = app.add_subcommand("softmax-eval", "two-track softmax");
  SoftmaxConfig sm_cfg;
  int sm_noise = 0, sm_trials = 1;
  smx->add_option("--dim", sm_cfg.d)->capture_default_str();
  smx->add_option("--range", sm_cfg.M, "inputs lie in [-M, 0]")
      ->capture_default_str();
  smx->add_option("--k", sm_cfg.k, "squaring iterations")
      ->capture_default_str();
  smx->add_option("--exp-degree", sm_cfg.exp_degree)->capture_default_str();
  smx->add_option("--invsqrt-degree", sm_cfg.invsqrt_degree)
      ->capture_default_str();
  smx->add_option("--sos-trials", sm_cfg.trials)->capture_default_str();
  smx->add_option("--trials", sm_trials)->capture_default_str();
  auto* sm_noise_opt = smx->add_option("--noise", sm_noise, "noise bits p");
  smx->callback([&] {
    SoftmaxEvalConfig c;
    c.softmax = sm_cfg;
    c.softmax.seed = g.seed;
    c.trials = sm_trials;
    c.seed = g.seed;
    SimParams preset;
    preset.slot_count = std::max<std::size_t>(
        1024, std::bit_ceil(static_cast<std::size_t>(std::max(sm_cfg.d, 1))));
    preset.top_level = 12;
    preset.boot_level = 11;
    preset.noise_bits.reset();
    c.params = resolve(g, preset, sm_noise_opt, sm_noise);
    SoftmaxEvalReport r = softmax_eval(c);
    Json j;
    j["dim"] = sm_cfg.d;
    j["range"] = sm_cfg.M;
    j["max_abs_error"] = r.max_err;
    j["error_bits"] = bits(r.max_err);
    j["main_levels_used"] = r.main_levels_used;
    j["main_bootstraps"] = r.main_bootstraps;
    j["aux_bootstraps"] = r.aux_bootstraps;
    j["ledger"] = to_json(r.ledger);
    emit(g, j);
  });

  // bitrev-check
  auto* br = app.add_subcommand("bitrev-check",
                                "index permutation properties");
  int br_trials = 1;
  br->add_option("--trials", br_trials, "random matrices for the shuffle")
      ->capture_default_str();
  br->callback([&] {
    auto res = bitrev_properties(g.seed, br_trials);
    bool all = true;
    Json arr = Json::array();
    for (const auto& r : res) {
      all = all && r.passed;
      arr.push_back({{"name", r.name}, {"passed", r.passed}});
      if (!g.json)
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "\n";
    }
    if (g.json)
      std::cout << Json{{"properties", arr}, {"passed", all}}.dump(2) << "\n";
    status = all ? 0 : 1;
  });

  // prefill-equiv
  auto* pre = app.add_subcommand("prefill-equiv",
                                 "chunked vs full prefill in clear");
  PrefillEquivConfig pe;
  std::string pe_golden;
  pre->add_option("--ntok", pe.split.ntok)->capture_default_str();
  pre->add_option("--ptok", pe.split.ptok)->capture_default_str();
  pre->add_option("--etok", pe.split.etok)->capture_default_str();
  pre->add_flag("--all-splits", pe.all_splits, "every ptok in [0, ntok)");
  pre->add_option("--decode-steps", pe.decode_steps)->capture_default_str();
  pre->add_option("--d-model", pe.model.d_model)->capture_default_str();
  pre->add_option("--d-head", pe.model.d_head)->capture_default_str();
  pre->add_option("--heads", pe.model.n_heads)->capture_default_str();
  pre->add_option("--d-ff", pe.model.d_ff)->capture_default_str();
  pre->add_option("--layers", pe.model.n_layers)->capture_default_str();
  pre->add_option("--golden-out", pe_golden,
                  "write full-prefill logits for the pinned test");
  pre->callback([&] {
    pe.model.seed = g.seed;
    PrefillEquivReport r = prefill_equiv(pe);
    if (!pe_golden.empty()) {
      ToyModel m(pe.model);
      auto toks = make_tokens(pe.split.ntok, pe.model.vocab, pe.model.seed);
      ForwardResult f = full_prefill(m, m.embed(toks));
      Json gj;
      gj["ntok"] = pe.split.ntok;
      gj["seed"] = pe.model.seed;
      gj["tokens"] = toks;
      gj["logits"] = std::vector<double>(f.logits.data(),
                                         f.logits.data() + f.logits.size());
      write_text(pe_golden, gj.dump(2) + "\n");
    }
    Json j;
    j["ntok"] = pe.split.ntok;
    j["splits_checked"] = r.splits_checked;
    j["max_abs_diff"] = r.max_diff;
    j["decode_steps"] = pe.decode_steps;
    j["decode_max_abs_diff"] = r.decode_max_diff;
    j["cache_rows_ok"] = r.cache_rows_ok;
    j["passed"] = r.passed();
    emit(g, j);
    status = r.passed() ? 0 : 1;
  });

  // attention-demo and cost-report share their options
  AttentionDemoConfig ad;
  int ad_noise = 0;
  bool ad_no_cc = false;
  auto add_attention_opts = [&](CLI::App* sub) {
    sub->add_option("--d", ad.d, "head dimension")->capture_default_str();
    sub->add_option("--noise", ad_noise, "noise bits p (0: exact)")
        ->capture_default_str();
    sub->add_flag("--on-the-fly", ad.on_the_fly);
    sub->add_flag("--parallel", ad.parallel);
    sub->add_flag("--no-cc", ad_no_cc, "skip the ciphertext-ciphertext part");
  };
  auto* att = app.add_subcommand("attention-demo",
                                 "encrypted attention against a public cache");
  add_attention_opts(att);
  att->callback([&] {
    ad.noise_bits = noise_opt(ad_noise);
    ad.seed = g.seed;
    ad.with_cc = !ad_no_cc;
    AttentionDemoReport r = attention_demo(ad);
    Json j;
    j["d"] = r.d;
    j["max_abs_error"] = r.max_err;
    j["error_bits"] = bits(r.max_err);
    j["tolerance"] = r.tolerance;
    j["levels_in"] = r.levels_in;
    j["levels_out"] = r.levels_out;
    j["main_bootstraps"] = r.main_bootstraps;
    j["aux_bootstraps"] = r.aux_bootstraps;
    j["shift"] = r.shift;
    j["range_M"] = r.range_M;
    if (ad.with_cc)
      j["cc_max_abs_error"] = r.cc_max_err;
    j["passed"] = r.passed();
    j["phases"] = to_json(r.phases);
    j["ledger"] = to_json(r.ledger);
    emit(g, j);
    status = r.passed() ? 0 : 1;
  });

  auto* cost = app.add_subcommand("cost-report",
                                  "per-phase counters of the attention demo");
  add_attention_opts(cost);
  cost->callback([&] {
    ad.noise_bits = noise_opt(ad_noise);
    ad.seed = g.seed;
    ad.with_cc = !ad_no_cc;
    AttentionDemoReport r = attention_demo(ad);
    std::cout << to_json(r.phases).dump(2) << "\n";
  });

  // ffn-check
  auto* ffn = app.add_subcommand("ffn-check",
                                 "encrypted SiLU, SwiGLU product and RMSNorm");
  FfnCheckConfig fc;
  int fc_noise = 0;
  ffn->add_option("--tokens", fc.tokens)->capture_default_str();
  ffn->add_option("--d-ff", fc.d_ff)->capture_default_str();
  ffn->add_option("--d-model", fc.d_model)->capture_default_str();
  ffn->add_option("--silu-degree", fc.silu_degree)->capture_default_str();
  ffn->add_option("--invsqrt-degree", fc.invsqrt_degree)->capture_default_str();
  ffn->add_option("--noise", fc_noise, "noise bits p (0: exact)")
      ->capture_default_str();
  ffn->callback([&] {
    fc.noise_bits = noise_opt(fc_noise);
    fc.seed = g.seed;
    FfnCheckReport r = ffn_check(fc);
    Json j;
    j["silu_max_abs_error"] = r.silu_max_err;
    j["swiglu_max_abs_error"] = r.swiglu_max_err;
    j["rmsnorm_max_abs_error"] = r.rms_max_err;
    j["silu_levels"] = r.silu_levels;
    j["rmsnorm_levels"] = r.rms_levels;
    j["phases"] = to_json(r.phases);
    emit(g, j);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return status;
}
