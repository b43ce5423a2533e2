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
#include "fhellm/checks.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace fhellm {

namespace {

// NaN-propagating running maximum
void worst(double& acc, double v)
{
  if (!(v <= acc))
    acc = v;
}

ClearMatrix first_rows(const ClearMatrix& x, int n)
{
  return x.topRows(n);
}

} // namespace

SimParams matrix_params(int d, std::optional<int> noise_bits,
                        std::uint64_t seed)
{
  if (d < 1)
    throw std::invalid_argument("dimension must be positive");
  SimParams sp;
  sp.slot_count = std::max<std::size_t>(
      sp.slot_count, std::bit_ceil(static_cast<std::size_t>(d) * d));
  sp.noise_bits = noise_bits;
  sp.seed = seed;
  return sp;
}

MatmulCheckReport pcmm_check(const PcmmCheckConfig& cfg)
{
  if (cfg.trials < 1)
    throw std::invalid_argument("need at least one trial");
  if (cfg.ell < 0)
    throw std::invalid_argument("tau power must be >= 0");
  Evaluator ev(cfg.params ? *cfg.params
                          : matrix_params(cfg.d, std::nullopt, cfg.seed));
  const BsgsSplit split = cfg.split ? *cfg.split : BsgsSplit::defaults(cfg.d);
  MatmulCheckReport rep;
  for (int t = 0; t < cfg.trials; ++t) {
    ClearMatrix a = random_matrix(cfg.d, cfg.d, cfg.seed + 2 * t);
    ClearMatrix b = random_matrix(cfg.d, cfg.d, cfg.seed + 2 * t + 1);
    PcmmPlan plan = make_pcmm_plan(ev, a, cfg.ell, split, cfg.on_the_fly);
    plan.parallel = cfg.parallel;
    PackedMatrix enc = encrypt_logical(ev, b, cfg.ell + 1);
    const auto rot0 = ev.ledger().ct_rotations;
    PackedMatrix out =
        cfg.naive ? pcmm_depth1(ev, plan, enc) : pcmm_bsgs(ev, plan, enc);
    rep.ct_rotations = ev.ledger().ct_rotations - rot0;
    rep.level_drop = enc.ct.level - out.ct.level;
    ClearMatrix want = tau_pow(a * b, cfg.ell);
    worst(rep.max_err, (decrypt_matrix(ev, out) - want).cwiseAbs().maxCoeff());
  }
  rep.ledger = ev.ledger();
  return rep;
}

MatmulCheckReport ccmm_check(const CcmmCheckConfig& cfg)
{
  if (cfg.trials < 1)
    throw std::invalid_argument("need at least one trial");
  Evaluator ev(cfg.params ? *cfg.params
                          : matrix_params(cfg.d, std::nullopt, cfg.seed));
  MatmulCheckReport rep;
  for (int t = 0; t < cfg.trials; ++t) {
    ClearMatrix a = random_matrix(cfg.d, cfg.d, cfg.seed + 2 * t);
    ClearMatrix b = random_matrix(cfg.d, cfg.d, cfg.seed + 2 * t + 1);
    PackedMatrix ea = encrypt_logical(ev, a, 0);
    PackedMatrix eb = encrypt_logical(ev, b, 0);
    const auto rot0 = ev.ledger().ct_rotations;
    PackedMatrix out = ccmm_jkls(ev, ea, eb);
    rep.ct_rotations = ev.ledger().ct_rotations - rot0;
    rep.level_drop = ea.ct.level - out.ct.level;
    worst(rep.max_err, (decrypt_logical(ev, out) - a * b).cwiseAbs().maxCoeff());
  }
  rep.ledger = ev.ledger();
  return rep;
}

SoftmaxEvalReport softmax_eval(const SoftmaxEvalConfig& cfg)
{
  if (cfg.trials < 1)
    throw std::invalid_argument("need at least one trial");
  const SoftmaxConfig& sc = cfg.softmax;
  SoftmaxKernel kernel(sc);
  SimParams sp;
  if (cfg.params) {
    sp = *cfg.params;
  } else {
    sp.slot_count = std::max<std::size_t>(1024, std::bit_ceil(
                                                    static_cast<std::size_t>(sc.d)));
    sp.top_level = 12;
    sp.boot_level = 11;
    sp.noise_bits = cfg.noise_bits;
    sp.seed = cfg.seed;
  }
  Evaluator ev(sp);
  const std::size_t n = ev.slots();
  if (n % sc.d != 0)
    throw std::invalid_argument("softmax length must divide the slot count");
  // instance b occupies slots b + i*stride; the slim track needs
  // stride * 2^j slots, so short vectors leave periodic copies
  const std::size_t slim = std::size_t{1} << std::max(sc.j_last, sc.j_mid);
  const std::size_t span = std::max<std::size_t>(sc.d, slim);
  if (n % span != 0)
    throw std::invalid_argument("slot count too small for the slim track");
  const int stride = static_cast<int>(n / span);
  const std::size_t period = static_cast<std::size_t>(sc.d) * stride;

  SoftmaxEvalReport rep;
  for (int t = 0; t < cfg.trials; ++t) {
    ClearMatrix r =
        random_matrix(1, static_cast<int>(period), cfg.seed + 7 + t);
    std::vector<double> x(n);
    for (std::size_t s = 0; s < n; ++s)
      x[s] = -sc.M * 0.5 * (r(0, s % period) + 1.0);
    SimCiphertext ct = ev.encrypt(x);
    const auto boots = ev.ledger().bootstraps;
    TrackReport tr;
    SimCiphertext y = kernel.run(ev, ct, stride, &tr);
    rep.main_levels_used = tr.main_levels_used;
    rep.aux_bootstraps = tr.aux_bootstraps;
    rep.main_bootstraps =
        static_cast<int>(ev.ledger().bootstraps - boots) - tr.aux_bootstraps;
    for (int b = 0; b < stride; ++b) {
      std::vector<double> col(sc.d);
      for (int i = 0; i < sc.d; ++i)
        col[i] = x[b + static_cast<std::size_t>(i) * stride];
      std::vector<double> want = softmax_clear(col);
      for (int i = 0; i < sc.d; ++i)
        worst(rep.max_err,
              std::abs(y.slots[b + static_cast<std::size_t>(i) * stride] - want[i]));
    }
  }
  rep.ledger = ev.ledger();
  return rep;
}

SlimEvalReport slim_eval_points(const SosTree& tree,
                                const std::vector<double>& xs, bool fused,
                                std::optional<SimParams> params)
{
  if (xs.empty())
    throw std::invalid_argument("no evaluation points");
  const int t_bits = std::bit_width(xs.size() - 1);
  const std::size_t period = std::size_t{1} << t_bits;
  SimParams sp;
  if (params) {
    sp = *params;
  } else {
    sp.slot_count =
        std::max<std::size_t>(sp.slot_count, period << tree.j);
    sp.top_level = std::max(sp.top_level, tree.k + 2);
    sp.boot_level = sp.top_level;
    sp.noise_bits.reset();
  }
  Evaluator ev(sp);
  std::vector<double> msg(ev.slots());
  for (std::size_t s = 0; s < msg.size(); ++s)
    msg[s] = xs[std::min(s % period, xs.size() - 1)];
  SimCiphertext ct = ev.encrypt(msg);
  SimCiphertext in = prepare_slim_input(ev, ct, tree, t_bits, fused);
  const auto rot0 = ev.ledger().ct_rotations;
  SimCiphertext r = slim_eval(ev, tree, in, t_bits, fused);
  SlimEvalReport rep;
  rep.levels_used = in.level - r.level;
  rep.total_levels = ct.level - r.level;
  rep.main_rotations = ev.ledger().ct_rotations - rot0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    rep.outputs.push_back(r.slots[i]);
    rep.reference.push_back(tree_eval_clear(tree, xs[i]));
  }
  rep.ledger = ev.ledger();
  return rep;
}

PrefillEquivReport prefill_equiv(const PrefillEquivConfig& cfg)
{
  cfg.split.validate();
  if (cfg.decode_steps < 0)
    throw std::invalid_argument("decode steps must be >= 0");
  ToyModel model(cfg.model);
  const int ntok = cfg.split.ntok;
  const int layers = cfg.model.n_layers;
  ClearMatrix x = model.embed(
      make_tokens(ntok + cfg.decode_steps, cfg.model.vocab, cfg.model.seed));
  ClearMatrix prompt = first_rows(x, ntok);
  ForwardResult full = full_prefill(model, prompt);

  PrefillEquivReport rep;
  auto rows_ok = [&](const KvCache& c, int n) {
    if (static_cast<int>(c.k.size()) != layers)
      return false;
    for (int l = 0; l < layers; ++l)
      if (c.k[l].rows() != n || c.v[l].rows() != n)
        return false;
    return true;
  };
  std::vector<int> ptoks;
  if (cfg.all_splits)
    for (int p = 0; p < ntok; ++p)
      ptoks.push_back(p);
  else
    ptoks.push_back(cfg.split.ptok);
  for (int p : ptoks) {
    ForwardResult c = chunked_prefill(model, prompt, {ntok, p, ntok - p});
    worst(rep.max_diff, (c.logits - full.logits).cwiseAbs().maxCoeff());
    rep.cache_rows_ok = rep.cache_rows_ok && rows_ok(c.cache, ntok);
    ++rep.splits_checked;
  }

  KvCache cache = full.cache;
  for (int s = 0; s < cfg.decode_steps; ++s) {
    ForwardResult step = decode_step(model, cache, x.row(ntok + s));
    ForwardResult again = full_prefill(model, first_rows(x, ntok + s + 1));
    worst(rep.decode_max_diff,
          (step.logits - again.logits).cwiseAbs().maxCoeff());
    rep.cache_rows_ok = rep.cache_rows_ok && rows_ok(step.cache, ntok + s + 1);
    cache = std::move(step.cache);
  }
  return rep;
}

} // namespace fhellm
