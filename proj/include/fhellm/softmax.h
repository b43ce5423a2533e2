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
#ifndef FHELLM_SOFTMAX_H
#define FHELLM_SOFTMAX_H
/**
 * @file softmax.h
 * @brief Two-track encrypted Softmax.
 *
 * The wide main track computes y = exp(x / 2^k) and then k times
 * y <- (y / ||y||)^2, never bootstrapping. The reciprocal norms come from
 * a slim auxiliary track: squared norm, scaled bootstrap, slim inverse
 * square root, scaled bootstrap.
 */
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "fhellm/packing.h"
#include "fhellm/polyapprox.h"
#include "fhellm/slotsim.h"
#include "fhellm/sospoly.h"

namespace fhellm {

using Interval = std::pair<double, double>;

struct SoftmaxConfig
{
  int d = 128;        // softmax length
  double M = 32.78;   // inputs lie in [-M, 0]
  int k = 2;          // squaring iterations
  int exp_degree = 15;
  int invsqrt_degree = 128;    // last iteration
  int invsqrt_mid_degree = 32; // earlier iterations
  int j_last = 5;
  int j_mid = 3;
  bool fused = true;
  int trials = 1; // SOS ordering search
  //! One interval per iteration; empty means calibrate.
  std::vector<Interval> invsqrt_intervals;
  int calib_samples = 64;
  double calib_margin = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
  //! Main-track depth, 2k + ceil(log2(exp_degree + 1)).
  int main_depth() const;
};

struct TrackReport
{
  int main_levels_used = 0;
  int aux_bootstraps = 0;
};

std::vector<double> softmax_clear(const std::vector<double>& x);
//! Softmax of every column.
ClearMatrix colwise_softmax(const ClearMatrix& m);

/**
 * Slot s of the result holds sum_i x[s + i*stride]^2 (indices mod the
 * slot count); d must be a power of two. One product, log2(d) rotations.
 */
SimCiphertext strided_norm_sq(Evaluator& ev, const SimCiphertext& ct, int d,
                              int stride);

/**
 * Inverse-square-root intervals for the k iterations. Earlier iterations
 * use the range observed on the samples (default: uniform vectors on
 * [-M, 0]) widened by calib_margin; the last uses [0.5/d, 1.5].
 */
std::vector<Interval>
calibrate_intervals(const SoftmaxConfig& cfg,
                    const std::vector<std::vector<double>>& samples = {});

//! Polynomials and trees for one configuration, built once.
class SoftmaxKernel
{
public:
  explicit SoftmaxKernel(SoftmaxConfig cfg,
                         const std::vector<std::vector<double>>& samples = {});

  const SoftmaxConfig& config() const { return cfg_; }
  const ApproxPoly& exp_poly() const { return exp_; }
  const std::vector<Interval>& intervals() const { return intervals_; }
  const SosTree& tree(int iter) const { return trees_.at(iter); }

  /**
   * Softmax of each instance x[base + i*stride], i < d, for every base in
   * [0, stride). Inputs must already be translated into [-M, 0].
   */
  SimCiphertext run(Evaluator& ev, const SimCiphertext& ct, int stride,
                    TrackReport* report = nullptr) const;

private:
  SoftmaxConfig cfg_;
  ApproxPoly exp_;
  std::vector<Interval> intervals_;
  std::vector<SosTree> trees_;
};

//! Softmax of a length-d vector packed periodically.
std::pair<SimCiphertext, TrackReport>
softmax_encrypted(Evaluator& ev, const SimCiphertext& ct,
                  const SoftmaxConfig& cfg);

//! Column softmax of tau(M); the result is tau(colwise_softmax(M)).
PackedMatrix softmax_on_tau_packed(Evaluator& ev, const PackedMatrix& pm,
                                   const SoftmaxKernel& kernel,
                                   TrackReport* report = nullptr);

} // namespace fhellm

#endif // FHELLM_SOFTMAX_H
