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
#include "fhellm/packing.h"

#include <map>
#include <random>
#include <stdexcept>

namespace fhellm {

namespace {

long pmod(long a, long n) { return ((a % n) + n) % n; }

void check_square(const ClearMatrix& m)
{
  if (m.rows() != m.cols())
    throw std::invalid_argument("matrix must be square");
}

void check_fits(int d, std::size_t slot_count)
{
  if (d < 1 || static_cast<std::size_t>(d) * d > slot_count)
    throw std::invalid_argument("d*d exceeds slot_count");
}

// Whole-vector rotations act as row rotations only when the d*d block
// repeats through the slots.
void check_row_rotatable(const PackedMatrix& pm)
{
  std::size_t n = pm.ct.slots.size();
  std::size_t dd = static_cast<std::size_t>(pm.dim) * pm.dim;
  if (!(pm.fill == Fill::periodic && n % dd == 0) && n != dd)
    throw std::invalid_argument(
        "row rotation needs a periodic layout or slot_count == d*d");
}

} // namespace

ClearMatrix random_matrix(int rows, int cols, std::uint64_t seed)
{
  if (rows < 0 || cols < 0)
    throw std::invalid_argument("random_matrix: negative size");
  std::mt19937_64 rng(seed);
  ClearMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = 2.0 * ((rng() >> 11) * 0x1p-53) - 1.0;
  return m;
}

ClearMatrix sigma(const ClearMatrix& m)
{
  check_square(m);
  const long d = m.rows();
  ClearMatrix r(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      r(i, j) = m(i, pmod(i + j, d));
  return r;
}

ClearMatrix tau(const ClearMatrix& m)
{
  check_square(m);
  const long d = m.rows();
  ClearMatrix r(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      r(i, j) = m(pmod(i + j, d), j);
  return r;
}

ClearMatrix tau_pow(const ClearMatrix& m, int l)
{
  check_square(m);
  const long d = m.rows();
  // tau^l reads row i + l*j of column j
  ClearMatrix r(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      r(i, j) = m(pmod(i + static_cast<long>(l) * j, d), j);
  return r;
}

ClearMatrix rot_row(const ClearMatrix& m, long k)
{
  check_square(m);
  const long d = m.rows();
  ClearMatrix r(d, d);
  for (long i = 0; i < d; ++i)
    r.row(i) = m.row(pmod(i + k, d));
  return r;
}

ClearMatrix rot_col(const ClearMatrix& m, long k)
{
  check_square(m);
  const long d = m.rows();
  ClearMatrix r(d, d);
  for (long j = 0; j < d; ++j)
    r.col(j) = m.col(pmod(j + k, d));
  return r;
}

std::vector<double> pack(const ClearMatrix& m, std::size_t slot_count,
                         Fill fill)
{
  check_square(m);
  const int d = static_cast<int>(m.rows());
  check_fits(d, slot_count);
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  std::vector<double> v(slot_count, 0.0);
  for (std::size_t s = 0; s < slot_count; ++s) {
    if (fill == Fill::zero && s >= dd)
      break;
    std::size_t q = s % dd;
    v[s] = m(q / d, q % d);
  }
  return v;
}

ClearMatrix unpack(std::span<const double> slots, int d)
{
  check_fits(d, slots.size());
  ClearMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m(i, j) = slots[static_cast<std::size_t>(i) * d + j];
  return m;
}

PackedMatrix encrypt_matrix(Evaluator& ev, const ClearMatrix& stored,
                            int tau_power, Fill fill)
{
  PackedMatrix pm;
  pm.ct = ev.encrypt(pack(stored, ev.slots(), fill));
  pm.dim = static_cast<int>(stored.rows());
  pm.tau_power = tau_power;
  pm.fill = fill;
  return pm;
}

PackedMatrix encrypt_logical(Evaluator& ev, const ClearMatrix& logical,
                             int tau_power, Fill fill)
{
  return encrypt_matrix(ev, tau_pow(logical, tau_power), tau_power, fill);
}

ClearMatrix decrypt_matrix(const Evaluator& ev, const PackedMatrix& pm)
{
  return unpack(ev.decrypt(pm.ct).slots, pm.dim);
}

ClearMatrix decrypt_logical(const Evaluator& ev, const PackedMatrix& pm)
{
  return tau_pow(decrypt_matrix(ev, pm), -pm.tau_power);
}

PackedPlainMatrix encode_matrix(Evaluator& ev, const ClearMatrix& stored,
                                int tau_power, Fill fill)
{
  PackedPlainMatrix pm;
  pm.pt = ev.encode(pack(stored, ev.slots(), fill));
  pm.dim = static_cast<int>(stored.rows());
  pm.tau_power = tau_power;
  pm.fill = fill;
  return pm;
}

ClearMatrix unpack_plain(const PackedPlainMatrix& pm)
{
  return unpack(pm.pt.slots, pm.dim);
}

std::vector<double> column_mask(int d, long k, std::size_t slot_count,
                                Fill fill, bool complement)
{
  check_fits(d, slot_count);
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  const long kk = pmod(k, d);
  std::vector<double> m(slot_count, 0.0);
  for (std::size_t s = 0; s < slot_count; ++s) {
    if (fill == Fill::zero && s >= dd)
      break;
    bool in = static_cast<long>(s % d) < d - kk;
    m[s] = (in != complement) ? 1.0 : 0.0;
  }
  return m;
}

PackedMatrix ct_rot_row(Evaluator& ev, const PackedMatrix& pm, long k)
{
  check_row_rotatable(pm);
  PackedMatrix r = pm;
  r.ct = ev.rotate(pm.ct, k * pm.dim);
  return r;
}

PackedMatrix ct_rot_col_masked(Evaluator& ev, const PackedMatrix& pm, long k)
{
  const int d = pm.dim;
  const long kk = pmod(k, d);
  PackedMatrix r = pm;
  if (kk == 0) {
    std::vector<double> ones = column_mask(d, 0, ev.slots(), pm.fill);
    r.ct = ev.pc_mult(ev.encode(ones), pm.ct);
    return r;
  }
  SimCiphertext a = ev.rotate(pm.ct, kk);
  SimCiphertext b = ev.rotate(pm.ct, kk - d);
  a = ev.pc_mult(ev.encode(column_mask(d, kk, ev.slots(), pm.fill)), a);
  b = ev.pc_mult(ev.encode(column_mask(d, kk, ev.slots(), pm.fill, true)), b);
  r.ct = ev.add(a, b);
  return r;
}

PackedPlainMatrix pt_rot_row(Evaluator& ev, const PackedPlainMatrix& pm,
                             long k)
{
  std::size_t n = pm.pt.slots.size();
  std::size_t dd = static_cast<std::size_t>(pm.dim) * pm.dim;
  if (!(pm.fill == Fill::periodic && n % dd == 0) && n != dd)
    throw std::invalid_argument(
        "row rotation needs a periodic layout or slot_count == d*d");
  PackedPlainMatrix r = pm;
  r.pt = ev.pt_rotate(pm.pt, k * pm.dim);
  return r;
}

PackedPlainMatrix pt_rot_col(Evaluator& ev, const PackedPlainMatrix& pm,
                             long k)
{
  const int d = pm.dim;
  const long kk = pmod(k, d);
  if (kk == 0)
    return pm;
  SimPlaintext a = ev.pt_rotate(pm.pt, kk);
  SimPlaintext b = ev.pt_rotate(pm.pt, kk - d);
  std::vector<double> m = column_mask(d, kk, pm.pt.slots.size(), pm.fill);
  std::vector<double> mbar =
      column_mask(d, kk, pm.pt.slots.size(), pm.fill, true);
  PackedPlainMatrix r = pm;
  for (std::size_t s = 0; s < r.pt.slots.size(); ++s)
    r.pt.slots[s] = m[s] != 0 ? a.slots[s] : (mbar[s] != 0 ? b.slots[s] : 0.0);
  return r;
}

SimCiphertext apply_diagonal_map(Evaluator& ev, const SimCiphertext& ct,
                                 const DiagonalMap& map)
{
  if (map.offsets.empty() || map.offsets.size() != map.weights.size())
    throw std::invalid_argument("malformed diagonal map");
  SimCiphertext acc;
  bool first = true;
  for (std::size_t t = 0; t < map.offsets.size(); ++t) {
    SimCiphertext term =
        ev.pc_mult(ev.encode(map.weights[t]), ev.rotate(ct, map.offsets[t]));
    acc = first ? term : ev.add(acc, term);
    first = false;
  }
  return acc;
}

DiagonalMap permutation_map(int d, std::size_t slot_count, Fill fill,
                            const IndexMap& src)
{
  check_fits(d, slot_count);
  const long dd = static_cast<long>(d) * d;
  const bool periodic = fill == Fill::periodic && slot_count % dd == 0;
  std::map<long, std::vector<double>> diag;
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) {
      auto [si, sj] = src(static_cast<int>(i), static_cast<int>(j));
      long dst = i * d + j;
      long from = pmod(si, d) * d + pmod(sj, d);
      long delta = from - dst;
      if (periodic)
        delta = pmod(delta, dd);
      auto& w = diag[delta];
      if (w.empty())
        w.assign(slot_count, 0.0);
      if (periodic) {
        for (std::size_t s = dst; s < slot_count; s += dd)
          w[s] = 1.0;
      } else {
        w[dst] = 1.0;
      }
    }
  DiagonalMap map;
  for (auto& [delta, w] : diag) {
    map.offsets.push_back(delta);
    map.weights.push_back(std::move(w));
  }
  return map;
}

PackedMatrix apply_matrix_permutation(Evaluator& ev, const PackedMatrix& pm,
                                      const IndexMap& src, int new_tau_power)
{
  PackedMatrix r = pm;
  r.ct = apply_diagonal_map(
      ev, pm.ct, permutation_map(pm.dim, ev.slots(), pm.fill, src));
  r.tau_power = new_tau_power;
  return r;
}

} // namespace fhellm
