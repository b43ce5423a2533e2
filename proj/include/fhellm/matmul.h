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
#ifndef FHELLM_MATMUL_H
#define FHELLM_MATMUL_H
/**
 * @file matmul.h
 * @brief Encrypted matrix products.
 *
 * pcmm_* multiply a public matrix A by an encrypted B held at tau power
 * l+1 and return tau^l(A*B) after a single level. The plaintext blocks
 *
 *   pt_{A,i,j,l} = Rot_row^{-l(i+jb)-jb} Rot_col^{i+jb} (tau^l sigma A)
 *
 * are either tabulated up front or derived from tau^l sigma A on demand
 * with two plaintext rotations each. ccmm_jkls is the three-level
 * ciphertext-ciphertext baseline.
 */
#include <vector>

#include "fhellm/packing.h"
#include "fhellm/slotsim.h"

namespace fhellm {

struct BsgsSplit
{
  int b = 1; // baby steps
  int g = 1; // giant steps

  //! b = g = sqrt(d) for perfect squares, else the smallest divisor of d
  //! that is >= sqrt(d).
  static BsgsSplit defaults(int d);
  void validate(int d) const;
};

struct PcmmPlan
{
  int dim = 0;
  int ell = 0;
  BsgsSplit split;
  bool on_the_fly = false;
  bool parallel = false;
  Fill fill = Fill::periodic;
  ClearMatrix base;            // tau^l sigma A, clear side
  SimPlaintext base_pt;        // square-root scale when on the fly
  std::vector<SimPlaintext> table; // eager blocks, index i + j*b
};

PcmmPlan make_pcmm_plan(Evaluator& ev, const ClearMatrix& a, int ell,
                        BsgsSplit split, bool on_the_fly,
                        Fill fill = Fill::periodic);

//! Clear value of pt_{A,i,j,l}.
ClearMatrix pt_block_matrix(const PcmmPlan& plan, int i, int j);

//! pt_{A,i,j,l} from the stored base with at most two plaintext rotations.
SimPlaintext derive_pt_block(Evaluator& ev, const PcmmPlan& plan, int i,
                             int j);
//! Tabulated or derived block, whichever the plan holds.
SimPlaintext pt_block(Evaluator& ev, const PcmmPlan& plan, int i, int j);

//! sum_k pt_k * Rot_row^k(B): d-1 ciphertext rotations.
PackedMatrix pcmm_depth1(Evaluator& ev, const PcmmPlan& plan,
                         const PackedMatrix& b);
//! sum_j Rot_row^{jb}( sum_i pt_{i,j} * Rot_row^i(B) ): b+g-2 rotations.
PackedMatrix pcmm_bsgs(Evaluator& ev, const PcmmPlan& plan,
                       const PackedMatrix& b);

//! A*B for two encrypted tau^0 matrices; three levels.
PackedMatrix ccmm_jkls(Evaluator& ev, const PackedMatrix& a,
                       const PackedMatrix& b);

} // namespace fhellm

#endif // FHELLM_MATMUL_H
