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
#ifndef FHELLM_PIPELINE_H
#define FHELLM_PIPELINE_H
/**
 * @file pipeline.h
 * @brief A small decoder block in clear (full, chunked and incremental
 * prefill), the encrypted plaintext-ciphertext attention chain, and
 * per-phase cost reports.
 *
 * Activations are row vectors: a chunk of T tokens is a T x d_model
 * matrix.
 */
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fhellm/matmul.h"
#include "fhellm/packing.h"
#include "fhellm/slotsim.h"
#include "fhellm/softmax.h"

namespace fhellm {

struct ToyModelConfig
{
  int d_model = 8;
  int d_head = 8;
  int n_heads = 1;
  int d_ff = 32;
  int n_layers = 1;
  int vocab = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LayerWeights
{
  Eigen::VectorXd attn_norm, ffn_norm;
  ClearMatrix wq, wk, wv, wo;   // d_model x d_model
  ClearMatrix w_gate, w_up;     // d_model x d_ff
  ClearMatrix w_down;           // d_ff x d_model
};

class ToyModel
{
public:
  explicit ToyModel(const ToyModelConfig& cfg);

  const ToyModelConfig& config() const { return cfg_; }
  const std::vector<LayerWeights>& layers() const { return layers_; }
  const ClearMatrix& embedding() const { return embed_; }
  const Eigen::VectorXd& final_norm() const { return final_norm_; }
  const ClearMatrix& w_out() const { return w_out_; }

  ClearMatrix embed(const std::vector<int>& tokens) const;

private:
  ToyModelConfig cfg_;
  std::vector<LayerWeights> layers_;
  ClearMatrix embed_;
  Eigen::VectorXd final_norm_;
  ClearMatrix w_out_;
};

//! Per-layer keys (after rotary embedding) and values, one row per token.
struct KvCache
{
  std::vector<ClearMatrix> k, v;

  int tokens() const { return k.empty() ? 0 : static_cast<int>(k[0].rows()); }
};

struct PrefillSplit
{
  int ntok = 0, ptok = 0, etok = 0;

  void validate() const;
};

struct ForwardResult
{
  Eigen::VectorXd logits; // last token
  KvCache cache;
};

std::vector<int> make_tokens(int n, int vocab, std::uint64_t seed);

//! Angle for token position `pos` and rotation pair `pair`.
double rope_angle(int pos, int pair, int d_head);
//! Rotary embedding of every head of x, row r at position start_pos + r.
ClearMatrix rope(const ClearMatrix& x, int start_pos, int d_head);
ClearMatrix rms_norm(const ClearMatrix& x, const Eigen::VectorXd& gain);
double silu(double x);

//! Run a chunk at positions cache.tokens().., extending the cache.
Eigen::VectorXd forward_chunk(const ToyModel& model, const ClearMatrix& x,
                              KvCache& cache);
ForwardResult full_prefill(const ToyModel& model, const ClearMatrix& x);
ForwardResult chunked_prefill(const ToyModel& model, const ClearMatrix& x,
                              const PrefillSplit& split);
ForwardResult decode_step(const ToyModel& model, const KvCache& cache,
                          const Eigen::RowVectorXd& x);

//! Named counter deltas of the main ciphertext's journey.
struct PhaseCost
{
  std::string name;
  CostLedger cost;
  int levels = 0;
};

struct CostReport
{
  std::vector<PhaseCost> phases;

  CostLedger total() const;
  int total_levels() const;
  const PhaseCost* find(const std::string& name) const;
};

//! Records a phase as the ledger difference since construction.
class PhaseScope
{
public:
  PhaseScope(CostReport* report, const Evaluator& ev, std::string name,
             int level_in);
  void close(int level_out);

private:
  CostReport* report_;
  const Evaluator& ev_;
  std::string name_;
  CostLedger before_;
  int level_in_;
};

//! First-layer activations of a split prefill, as seen by the attention.
struct AttentionInputs
{
  ClearMatrix q_priv;     // private queries before rotary embedding
  ClearMatrix k_new;      // private keys before rotary embedding
  ClearMatrix v_new;
  ClearMatrix q_pub;      // public queries after rotary embedding
  ClearMatrix k_pub;      // public cache keys
  ClearMatrix v_pub;
  int start_pos = 0;      // position of the first private token
};

AttentionInputs attention_inputs(const ToyModel& model, const ClearMatrix& x,
                                 const PrefillSplit& split);

//! softmax_rows(rope(Q) K_pub^T / sqrt(d)) V_pub
ClearMatrix pc_attention_clear(const AttentionInputs& in);

/**
 * Rotary embedding of an encrypted tau^2(X^T) (columns are tokens from
 * start_pos on). One rotation, one level.
 */
PackedMatrix rope_tau2(Evaluator& ev, const PackedMatrix& xt, int start_pos);

struct PcAttentionOptions
{
  double shift = 0;      // scores - shift must lie in [-M, 0]
  bool on_the_fly = false;
  bool parallel = false;
};

/**
 * Encrypted queries q_t = tau^2(Q^T) against the public cache. Returns
 * O^T at tau power 0 with O = softmax_rows(rope(Q) K^T/sqrt(d)) V.
 */
PackedMatrix pc_attention_encrypted(Evaluator& ev, const PackedMatrix& q_t,
                                    const ClearMatrix& k_pub,
                                    const ClearMatrix& v_pub, int start_pos,
                                    const SoftmaxKernel& kernel,
                                    const PcAttentionOptions& opts,
                                    CostReport* report = nullptr,
                                    TrackReport* track = nullptr);

/**
 * Q K^T / sqrt(d) for encrypted queries and keys, both held as
 * tau^2(X^T) after rotary embedding: bootstrap, one permutation to
 * tau^0 row layout, then the three-level product.
 */
PackedMatrix cc_attention_scores(Evaluator& ev, const PackedMatrix& q_t,
                                 const PackedMatrix& k_t,
                                 CostReport* report = nullptr);

struct AttentionDemoConfig
{
  int d = 8;
  std::optional<int> noise_bits;
  std::uint64_t seed = 0;
  bool on_the_fly = false;
  bool parallel = false;
  bool with_cc = true;
};

struct AttentionDemoReport
{
  int d = 0;
  double max_err = 0;
  double tolerance = 0;
  int levels_in = 0, levels_out = 0;
  int main_bootstraps = 0;
  int aux_bootstraps = 0;
  double shift = 0, range_M = 0;
  double cc_max_err = 0;
  CostReport phases;
  CostLedger ledger;

  bool passed() const { return max_err < tolerance && main_bootstraps == 0; }
};

SimParams attention_params(int d, std::optional<int> noise_bits,
                           std::uint64_t seed);
AttentionDemoReport attention_demo(const AttentionDemoConfig& cfg);

struct FfnCheckConfig
{
  int tokens = 8;
  int d_ff = 32;
  int d_model = 16;
  int silu_degree = 127;
  int invsqrt_degree = 63;
  int outlier_every = 8; // dimensions with the wide SiLU range
  std::optional<int> noise_bits;
  std::uint64_t seed = 0;
};

struct FfnCheckReport
{
  double silu_max_err = 0;
  double swiglu_max_err = 0;
  double rms_max_err = 0;
  int silu_levels = 0;
  int rms_levels = 0;
  CostReport phases;
};

FfnCheckReport ffn_check(const FfnCheckConfig& cfg);

} // namespace fhellm

#endif // FHELLM_PIPELINE_H
