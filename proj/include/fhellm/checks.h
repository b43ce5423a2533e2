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
#ifndef FHELLM_CHECKS_H
#define FHELLM_CHECKS_H
/**
 * @file checks.h
 * @brief Randomized end-to-end runs of the kernels against clear oracles,
 * shared by the command line tool, the acceptance runner and the Python
 * module.
 */
#include <cstdint>
#include <optional>
#include <vector>

#include "fhellm/matmul.h"
#include "fhellm/pipeline.h"
#include "fhellm/softmax.h"
#include "fhellm/sospoly.h"

namespace fhellm {

//! Default parameters with enough slots for a d x d matrix.
SimParams matrix_params(int d, std::optional<int> noise_bits,
                        std::uint64_t seed);

struct PcmmCheckConfig
{
  int d = 8;
  int ell = 0;
  std::optional<BsgsSplit> split; // default: BsgsSplit::defaults(d)
  bool on_the_fly = false;
  bool naive = false; // d-1 rotation form instead of baby-step giant-step
  bool parallel = false;
  int trials = 1;
  std::optional<SimParams> params; // default: matrix_params(d, exact)
  std::uint64_t seed = 0;
};

struct MatmulCheckReport
{
  double max_err = 0;   // worst over trials, vs tau^l(A B)
  int level_drop = 0;   // identical in every trial
  std::uint64_t ct_rotations = 0; // per product
  CostLedger ledger;    // whole run
};

MatmulCheckReport pcmm_check(const PcmmCheckConfig& cfg);

struct CcmmCheckConfig
{
  int d = 8;
  int trials = 1;
  std::optional<SimParams> params;
  std::uint64_t seed = 0;
};

MatmulCheckReport ccmm_check(const CcmmCheckConfig& cfg);

struct SoftmaxEvalConfig
{
  SoftmaxConfig softmax;
  std::optional<int> noise_bits;
  int trials = 1;
  std::optional<SimParams> params; // default: 12/11 levels, >= d slots
  std::uint64_t seed = 0;
};

struct SoftmaxEvalReport
{
  double max_err = 0;
  int main_levels_used = 0;
  int aux_bootstraps = 0;  // per run
  int main_bootstraps = 0; // per run
  CostLedger ledger;
};

//! Inputs uniform on [-M, 0], one instance per d slots.
SoftmaxEvalReport softmax_eval(const SoftmaxEvalConfig& cfg);

struct SlimEvalReport
{
  std::vector<double> outputs;
  std::vector<double> reference; // tree recombined in clear
  int levels_used = 0;  // slim evaluation proper
  int total_levels = 0; // including the input normalization
  std::uint64_t main_rotations = 0;
  CostLedger ledger;
};

/**
 * Evaluate a tree on the given points: each point takes one slot of a
 * 2^t-slot message (t = ceil(log2 n)) that is replicated over the whole
 * ciphertext.
 */
SlimEvalReport slim_eval_points(const SosTree& tree,
                                const std::vector<double>& xs, bool fused,
                                std::optional<SimParams> params = {});

struct PrefillEquivConfig
{
  ToyModelConfig model;
  PrefillSplit split{32, 24, 8};
  bool all_splits = false; // every ptok in [0, ntok)
  int decode_steps = 0;
};

struct PrefillEquivReport
{
  double max_diff = 0;        // chunked vs full prefill logits
  double decode_max_diff = 0; // decode_step vs re-prefill
  int splits_checked = 0;
  bool cache_rows_ok = true;

  bool passed(double tol = 1e-6) const
  {
    return max_diff < tol && decode_max_diff < tol && cache_rows_ok;
  }
};

PrefillEquivReport prefill_equiv(const PrefillEquivConfig& cfg);

} // namespace fhellm

#endif // FHELLM_CHECKS_H
