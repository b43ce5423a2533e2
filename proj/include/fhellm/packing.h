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
#ifndef FHELLM_PACKING_H
#define FHELLM_PACKING_H
/**
 * @file packing.h
 * @brief Row-major packing of d x d matrices into slots, and the
 * sigma / tau / row / column permutations acting on them.
 *
 * A packed matrix stores tau^l(M) for some logical M; the annotation l
 * travels with the ciphertext so kernels can refuse a broken chain.
 */
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fhellm/slotsim.h"

namespace fhellm {

using ClearMatrix = Eigen::MatrixXd;

//! What the slots beyond d*d hold.
enum class Fill
{
  periodic,
  zero
};

//! Entries uniform in [-1, 1), reproducible across platforms.
ClearMatrix random_matrix(int rows, int cols, std::uint64_t seed);

ClearMatrix sigma(const ClearMatrix& m);
ClearMatrix tau(const ClearMatrix& m);
//! tau applied l times; negative l applies the inverse.
ClearMatrix tau_pow(const ClearMatrix& m, int l);
//! (rot_row(M,k))_{i,j} = M_{i+k,j}
ClearMatrix rot_row(const ClearMatrix& m, long k);
//! (rot_col(M,k))_{i,j} = M_{i,j+k}
ClearMatrix rot_col(const ClearMatrix& m, long k);

std::vector<double> pack(const ClearMatrix& m, std::size_t slot_count,
                         Fill fill = Fill::periodic);
ClearMatrix unpack(std::span<const double> slots, int d);

struct PackedMatrix
{
  SimCiphertext ct;
  int dim = 0;
  int tau_power = 0;
  Fill fill = Fill::periodic;
};

struct PackedPlainMatrix
{
  SimPlaintext pt;
  int dim = 0;
  int tau_power = 0;
  Fill fill = Fill::periodic;
};

//! Encrypt the matrix as stored (the caller has already applied tau^l).
PackedMatrix encrypt_matrix(Evaluator& ev, const ClearMatrix& stored,
                            int tau_power, Fill fill = Fill::periodic);
//! Encrypt tau^l(logical).
PackedMatrix encrypt_logical(Evaluator& ev, const ClearMatrix& logical,
                             int tau_power, Fill fill = Fill::periodic);
ClearMatrix decrypt_matrix(const Evaluator& ev, const PackedMatrix& pm);
//! Undo the tau power as well.
ClearMatrix decrypt_logical(const Evaluator& ev, const PackedMatrix& pm);

PackedPlainMatrix encode_matrix(Evaluator& ev, const ClearMatrix& stored,
                                int tau_power, Fill fill = Fill::periodic);
ClearMatrix unpack_plain(const PackedPlainMatrix& pm);

//! 0/1 mask selecting slots whose column index is < d - k.
std::vector<double> column_mask(int d, long k, std::size_t slot_count,
                                Fill fill, bool complement = false);

PackedMatrix ct_rot_row(Evaluator& ev, const PackedMatrix& pm, long k);
//! Rot_k(ct)*m_k + Rot_{k-d}(ct)*(1-m_k); one level.
PackedMatrix ct_rot_col_masked(Evaluator& ev, const PackedMatrix& pm, long k);

PackedPlainMatrix pt_rot_row(Evaluator& ev, const PackedPlainMatrix& pm,
                             long k);
PackedPlainMatrix pt_rot_col(Evaluator& ev, const PackedPlainMatrix& pm,
                             long k);

/**
 * Linear map out[s] = sum_delta w_delta[s] * in[s + delta], realized as
 * rotations followed by plaintext products; one level.
 */
struct DiagonalMap
{
  std::vector<long> offsets;
  std::vector<std::vector<double>> weights;
};

SimCiphertext apply_diagonal_map(Evaluator& ev, const SimCiphertext& ct,
                                 const DiagonalMap& map);

//! Entry (i,j) of the output reads entry src(i,j) of the input.
using IndexMap = std::function<std::pair<int, int>(int, int)>;

DiagonalMap permutation_map(int d, std::size_t slot_count, Fill fill,
                            const IndexMap& src);

PackedMatrix apply_matrix_permutation(Evaluator& ev, const PackedMatrix& pm,
                                      const IndexMap& src, int new_tau_power);

} // namespace fhellm

#endif // FHELLM_PACKING_H
