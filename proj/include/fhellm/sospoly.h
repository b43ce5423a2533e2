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
#ifndef FHELLM_SOSPOLY_H
#define FHELLM_SOSPOLY_H
/**
 * @file sospoly.h
 * @brief Sum-of-squares decompositions P = U^2 + V^2 - m, their recursive
 * tree, and slim polynomial evaluation on sparsely used ciphertexts.
 *
 * Decompositions are carried out on Chebyshev series in the normalized
 * variable t of the approximation interval; the tree nodes keep that
 * representation.
 */
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fhellm/polyapprox.h"
#include "fhellm/slotsim.h"

namespace fhellm {

//! Roots of a polynomial in x, with P = lead * prod (x - root).
struct RootSet
{
  std::vector<std::complex<double>> roots;
  double lead = 0;
};

//! max over the reals of -P. P must have even degree and positive lead.
double max_neg(const ApproxPoly& p);

//! Throws std::runtime_error if a root's residual exceeds 1e-8*max|coeff|.
RootSet find_roots(const ApproxPoly& p);

/**
 * Which root of each conjugate pair goes into U + iV. Entry i refers to
 * the i-th upper half-plane root by increasing real part; missing entries
 * alternate (false, true, false, ...).
 */
struct RootOrdering
{
  std::vector<bool> flip;
};

struct SosOptions
{
  // U = beta*Re(q) + alpha*Im(q), V = alpha*Re(q) - beta*Im(q)
  double alpha = M_SQRT1_2;
  double beta = M_SQRT1_2;
  std::optional<double> m_override; // must be >= max_neg(P)
  double margin = 1e-6;             // m = max_neg + margin*max|coeff|
};

struct SosSplit
{
  ApproxPoly u, v;
  double m = 0;
};

SosSplit split_sos(const ApproxPoly& p, const RootOrdering& ordering = {},
                   const SosOptions& opts = {});
//! sup over the interval of |U| + |V|.
double split_score(const SosSplit& s);
//! Best of `trials` orderings (trial 0 is the default) by split_score.
RootOrdering search_stable(const ApproxPoly& p, int trials,
                           std::uint64_t seed = 0,
                           const SosOptions& opts = {});

struct SosNode
{
  ApproxPoly u;  // Chebyshev basis
  double m = 0;  // constant pairing this node with its children
};

struct SosTree
{
  int k = 0; // root degree 2^k
  int j = 0; // recursion depth
  double lo = -1, hi = 1;
  int sign = 1; // the tree decomposes sign * P
  double alpha = M_SQRT1_2, beta = M_SQRT1_2;
  std::vector<std::vector<SosNode>> levels; // levels[l] has 2^l nodes
  std::vector<double> scores;               // scores[l-1] for l = 1..j

  double score() const;
  const std::vector<SosNode>& leaves() const { return levels.back(); }
};

struct TreeOptions
{
  int j = 1;
  int trials = 1; // 1: default orderings only
  std::uint64_t seed = 0;
  SosOptions split;
};

SosTree build_tree(const ApproxPoly& p, const TreeOptions& opts);
//! Largest relative coefficient residual of the recursion over all nodes.
double tree_residual(const SosTree& tree);
//! Value of the tree at x, recombined in clear.
double tree_eval_clear(const SosTree& tree, double x);

//! lead^(1/D) of every leaf in the t variable (D = leaf degree).
std::vector<double> leaf_scales(const SosTree& tree);

/**
 * Affine map of x onto the tree's t variable, multiplied in the fused
 * case by the scale of the leaf each slot block feeds. One level.
 */
SimCiphertext prepare_slim_input(Evaluator& ev, const SimCiphertext& ct,
                                 const SosTree& tree, int t_bits, bool fused);

//! Copy slots [0, 2^t) into the next 2^j - 1 blocks. Other slots of the
//! input must be zero. j rotations, no level.
SimCiphertext replicate_slim(Evaluator& ev, const SimCiphertext& ct,
                             int t_bits, int j);

/**
 * Slim evaluation of sign * P on a prepared input (t variable, blocks of
 * 2^t slots replicated 2^j times). Consumes k+1 levels, or k when fused.
 * The recombination rotations wrap across blocks, so the input must be
 * periodic over the whole slot vector.
 */
SimCiphertext slim_eval(Evaluator& ev, const SosTree& tree,
                        const SimCiphertext& ct, int t_bits, bool fused);

} // namespace fhellm

#endif // FHELLM_SOSPOLY_H
