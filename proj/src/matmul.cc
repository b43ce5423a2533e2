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
#include "fhellm/matmul.h"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace fhellm {

namespace {

long pmod(long a, long n) { return ((a % n) + n) % n; }

void check_chain(const PcmmPlan& plan, const PackedMatrix& b)
{
  if (b.dim != plan.dim)
    throw std::invalid_argument("pcmm: dimension mismatch");
  if (b.tau_power != plan.ell + 1)
    throw std::invalid_argument(
        "pcmm: operand must be packed at tau power l+1 (broken tau chain)");
}

// Plaintext for Rot_row^a Rot_col^c (tau^l sigma A).
SimPlaintext shifted_block(Evaluator& ev, const PcmmPlan& plan, long a, long c)
{
  const int d = plan.dim;
  a = pmod(a, d);
  c = pmod(c, d);
  if (!plan.on_the_fly)
    return ev.encode(pack(rot_row(rot_col(plan.base, c), a), ev.slots(),
                          plan.fill));

  std::size_t n = ev.slots();
  std::size_t dd = static_cast<std::size_t>(d) * d;
  if (!(plan.fill == Fill::periodic && n % dd == 0) && n != dd)
    throw std::invalid_argument(
        "on-the-fly blocks need a periodic layout or slot_count == d*d");

  if (c == 0) {
    SimPlaintext r = ev.pt_rotate(plan.base_pt, a * d);
    SimPlaintext ones = ev.encode_sqrt(column_mask(d, 0, n, plan.fill));
    return ev.pt_pt_mult_sqrt_scale(r, ones);
  }
  SimPlaintext r1 = ev.pt_rotate(plan.base_pt, a * d + c);
  SimPlaintext r2 = ev.pt_rotate(plan.base_pt, a * d + c - d);
  SimPlaintext m = ev.encode_sqrt(column_mask(d, c, n, plan.fill));
  SimPlaintext mbar = ev.encode_sqrt(column_mask(d, c, n, plan.fill, true));
  return ev.pt_add(ev.pt_pt_mult_sqrt_scale(r1, m),
                   ev.pt_pt_mult_sqrt_scale(r2, mbar));
}

void block_indices(const PcmmPlan& plan, int i, int j, long& a, long& c)
{
  if (i < 0 || i >= plan.split.b || j < 0 || j >= plan.split.g)
    throw std::out_of_range("pt block index out of range");
  const long b = plan.split.b;
  const long k = i + j * b;
  c = k;
  a = -static_cast<long>(plan.ell) * k - j * b;
}

} // namespace

BsgsSplit BsgsSplit::defaults(int d)
{
  if (d < 1)
    throw std::invalid_argument("dimension must be positive");
  int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
  if (r * r == d)
    return {r, r};
  for (int b = 1; b <= d; ++b)
    if (d % b == 0 && static_cast<long>(b) * b >= d)
      return {b, d / b};
  return {d, 1};
}

void BsgsSplit::validate(int d) const
{
  if (b < 1 || g < 1 || b * g != d)
    throw std::invalid_argument("BSGS split must satisfy b*g == d");
}

PcmmPlan make_pcmm_plan(Evaluator& ev, const ClearMatrix& a, int ell,
                        BsgsSplit split, bool on_the_fly, Fill fill)
{
  if (a.rows() != a.cols())
    throw std::invalid_argument("pcmm: weight matrix must be square");
  if (ell < 0)
    throw std::invalid_argument("pcmm: tau power must be non-negative");
  PcmmPlan plan;
  plan.dim = static_cast<int>(a.rows());
  plan.ell = ell;
  plan.split = split;
  plan.split.validate(plan.dim);
  plan.on_the_fly = on_the_fly;
  plan.fill = fill;
  plan.base = tau_pow(sigma(a), ell);
  std::vector<double> packed = pack(plan.base, ev.slots(), fill);
  if (on_the_fly) {
    plan.base_pt = ev.encode_sqrt(packed);
  } else {
    plan.base_pt = ev.encode(packed);
    for (int j = 0; j < split.g; ++j)
      for (int i = 0; i < split.b; ++i)
        plan.table.push_back(
            ev.encode(pack(pt_block_matrix(plan, i, j), ev.slots(), fill)));
  }
  return plan;
}

ClearMatrix pt_block_matrix(const PcmmPlan& plan, int i, int j)
{
  long a, c;
  block_indices(plan, i, j, a, c);
  return rot_row(rot_col(plan.base, c), a);
}

SimPlaintext derive_pt_block(Evaluator& ev, const PcmmPlan& plan, int i, int j)
{
  long a, c;
  block_indices(plan, i, j, a, c);
  if (!plan.on_the_fly)
    throw std::invalid_argument("derive_pt_block needs an on-the-fly plan");
  return shifted_block(ev, plan, a, c);
}

SimPlaintext pt_block(Evaluator& ev, const PcmmPlan& plan, int i, int j)
{
  if (plan.on_the_fly)
    return derive_pt_block(ev, plan, i, j);
  if (i < 0 || i >= plan.split.b || j < 0 || j >= plan.split.g)
    throw std::out_of_range("pt block index out of range");
  return plan.table[static_cast<std::size_t>(i + j * plan.split.b)];
}

PackedMatrix pcmm_depth1(Evaluator& ev, const PcmmPlan& plan,
                         const PackedMatrix& b)
{
  check_chain(plan, b);
  const int d = plan.dim;
  PackedMatrix out;
  for (int k = 0; k < d; ++k) {
    SimPlaintext pt =
        shifted_block(ev, plan, -static_cast<long>(plan.ell) * k, k);
    SimCiphertext term = ev.pc_mult(pt, ct_rot_row(ev, b, k).ct);
    out.ct = k == 0 ? term : ev.add(out.ct, term);
  }
  out.dim = d;
  out.tau_power = plan.ell;
  out.fill = b.fill;
  return out;
}

PackedMatrix pcmm_bsgs(Evaluator& ev, const PcmmPlan& plan,
                       const PackedMatrix& b)
{
  check_chain(plan, b);
  plan.split.validate(plan.dim);
  const int bs = plan.split.b, gs = plan.split.g;

  std::vector<PackedMatrix> baby;
  baby.reserve(bs);
  for (int i = 0; i < bs; ++i)
    baby.push_back(ct_rot_row(ev, b, i));

  auto giant = [&](Evaluator& e, int j) {
    SimCiphertext inner;
    for (int i = 0; i < bs; ++i) {
      SimCiphertext term = e.pc_mult(pt_block(e, plan, i, j), baby[i].ct);
      inner = i == 0 ? term : e.add(inner, term);
    }
    PackedMatrix pm = baby[0];
    pm.ct = inner;
    return ct_rot_row(e, pm, static_cast<long>(j) * bs).ct;
  };

  std::vector<SimCiphertext> partial(gs);
  if (plan.parallel && gs > 1) {
    std::vector<Evaluator> kids;
    kids.reserve(gs);
    for (int j = 0; j < gs; ++j)
      kids.push_back(ev.fork(static_cast<std::uint64_t>(j)));
    std::vector<std::thread> pool;
    for (int j = 0; j < gs; ++j)
      pool.emplace_back([&, j] { partial[j] = giant(kids[j], j); });
    for (auto& t : pool)
      t.join();
    for (auto& k : kids)
      ev.merge(k);
  } else {
    for (int j = 0; j < gs; ++j)
      partial[j] = giant(ev, j);
  }

  PackedMatrix out;
  out.ct = partial[0];
  for (int j = 1; j < gs; ++j)
    out.ct = ev.add(out.ct, partial[j]);
  out.dim = plan.dim;
  out.tau_power = plan.ell;
  out.fill = b.fill;
  return out;
}

PackedMatrix ccmm_jkls(Evaluator& ev, const PackedMatrix& a,
                       const PackedMatrix& b)
{
  if (a.dim != b.dim)
    throw std::invalid_argument("ccmm: dimension mismatch");
  if (a.tau_power != 0 || b.tau_power != 0)
    throw std::invalid_argument("ccmm: operands must be at tau power 0");
  if (a.ct.level != b.ct.level)
    throw std::logic_error("ccmm: operand levels differ");
  if (a.ct.level < 3)
    throw NeedsBootstrap("ccmm needs three levels");
  const int d = a.dim;

  // sigma(A) and tau(B) side by side: one level
  PackedMatrix sa = apply_matrix_permutation(
      ev, a, [d](int i, int j) { return std::make_pair(i, (i + j) % d); }, 0);
  PackedMatrix tb = apply_matrix_permutation(
      ev, b, [d](int i, int j) { return std::make_pair((i + j) % d, j); }, 0);

  PackedMatrix out;
  for (int k = 0; k < d; ++k) {
    SimCiphertext ak = k == 0 ? ev.drop_level(sa.ct, sa.ct.level - 1)
                              : ct_rot_col_masked(ev, sa, k).ct;
    SimCiphertext bk = ct_rot_row(ev, tb, k).ct;
    bk = ev.drop_level(bk, ak.level);
    SimCiphertext term = ev.cc_mult(ak, bk);
    out.ct = k == 0 ? term : ev.add(out.ct, term);
  }
  out.dim = d;
  out.tau_power = 0;
  out.fill = a.fill;
  return out;
}

} // namespace fhellm
