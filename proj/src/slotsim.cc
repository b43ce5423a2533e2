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
#include "fhellm/slotsim.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace fhellm {

void SimParams::validate() const
{
  if (slot_count == 0 || !std::has_single_bit(slot_count))
    throw std::invalid_argument("slot_count must be a power of two");
  if (top_level < 1)
    throw std::invalid_argument("top_level must be >= 1");
  if (boot_level < 1 || boot_level > top_level)
    throw std::invalid_argument("boot_level must lie in [1, top_level]");
  if (log_scale <= 0)
    throw std::invalid_argument("log_scale must be positive");
  if (noise_bits && *noise_bits <= 0)
    throw std::invalid_argument("noise_bits must be positive");
}

double SimCiphertext::noise_est() const
{
  return noise.empty() ? 0.0 : *std::max_element(noise.begin(), noise.end());
}

CostLedger& CostLedger::operator+=(const CostLedger& o)
{
  ct_rotations += o.ct_rotations;
  cc_mults += o.cc_mults;
  pc_mults += o.pc_mults;
  pt_rotations += o.pt_rotations;
  pt_mults += o.pt_mults;
  rescales += o.rescales;
  bootstraps += o.bootstraps;
  min_level_reached = std::min(min_level_reached, o.min_level_reached);
  return *this;
}

CostLedger CostLedger::operator-(const CostLedger& o) const
{
  CostLedger d;
  d.ct_rotations = ct_rotations - o.ct_rotations;
  d.cc_mults = cc_mults - o.cc_mults;
  d.pc_mults = pc_mults - o.pc_mults;
  d.pt_rotations = pt_rotations - o.pt_rotations;
  d.pt_mults = pt_mults - o.pt_mults;
  d.rescales = rescales - o.rescales;
  d.bootstraps = bootstraps - o.bootstraps;
  d.min_level_reached = min_level_reached;
  return d;
}

BoundsProfile BoundsProfile::uniform(std::size_t n, double beta)
{
  return BoundsProfile{std::vector<double>(n, beta)};
}

void BoundsProfile::validate(std::size_t slot_count) const
{
  if (per_slot_bound.size() != slot_count)
    throw std::invalid_argument("bounds profile length != slot_count");
  for (double b : per_slot_bound)
    if (!(b > 0) || !std::isfinite(b))
      throw std::invalid_argument("bounds must be positive and finite");
}

std::vector<double> rotate_slots(std::span<const double> v, long k)
{
  const long n = static_cast<long>(v.size());
  std::vector<double> out(v.size());
  if (n == 0)
    return out;
  long s = ((k % n) + n) % n;
  for (long i = 0; i < n; ++i)
    out[i] = v[(i + s) % n];
  return out;
}

double max_abs(std::span<const double> v)
{
  double m = 0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

Evaluator::Evaluator(const SimParams& params) : params_(params)
{
  params_.validate();
  eps_ = params_.noise_bits ? std::ldexp(1.0, -*params_.noise_bits) : 0.0;
  ledger_.min_level_reached = params_.top_level;
  rng_.seed(params_.seed);
}

void Evaluator::reset_ledger()
{
  ledger_ = CostLedger{};
  ledger_.min_level_reached = params_.top_level;
}

Evaluator Evaluator::fork(std::uint64_t stream) const
{
  SimParams p = params_;
  p.seed = params_.seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  return Evaluator(p);
}

void Evaluator::merge(const Evaluator& child) { ledger_ += child.ledger_; }

double Evaluator::uniform()
{
  // [-1, 1), independent of the standard library's distributions
  return std::ldexp(static_cast<double>(rng_() >> 11), -52) - 1.0;
}

void Evaluator::check_len(std::size_t n) const
{
  if (n != params_.slot_count)
    throw std::invalid_argument("slot vector length != slot_count");
}

void Evaluator::consume(SimCiphertext& ct)
{
  if (ct.level < 1)
    throw NeedsBootstrap("level exhausted: needs bootstrap");
  ct.level -= 1;
  ledger_.rescales += 1;
  ledger_.min_level_reached = std::min(ledger_.min_level_reached, ct.level);
}

void Evaluator::inject(SimCiphertext& ct, double magnitude)
{
  if (exact() || magnitude == 0)
    return;
  for (std::size_t i = 0; i < ct.slots.size(); ++i) {
    ct.slots[i] += magnitude * uniform();
    ct.noise[i] += magnitude;
  }
}

SimPlaintext Evaluator::encode(std::span<const double> values, int log_scale)
{
  const std::size_t n = params_.slot_count;
  if (values.empty() || values.size() > n || n % values.size() != 0)
    throw std::invalid_argument("encode: length must divide slot_count");
  SimPlaintext pt;
  pt.log_scale = log_scale;
  pt.slots.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    pt.slots[i] = values[i % values.size()];
  if (!exact())
    for (double& x : pt.slots)
      x += eps_ * uniform();
  return pt;
}

SimPlaintext Evaluator::encode_sqrt(std::span<const double> values)
{
  if (params_.log_scale % 2 != 0)
    throw std::invalid_argument("square-root encoding needs an even log_scale");
  return encode(values, params_.log_scale / 2);
}

SimCiphertext Evaluator::encrypt(const SimPlaintext& pt)
{
  check_len(pt.slots.size());
  if (pt.log_scale != params_.log_scale)
    throw std::invalid_argument("encrypt: plaintext not at the context scale");
  SimCiphertext ct;
  ct.slots = pt.slots;
  ct.level = params_.top_level;
  ct.log_scale = pt.log_scale;
  ct.noise.assign(pt.slots.size(), 0.0);
  inject(ct, eps_);
  return ct;
}

SimPlaintext Evaluator::decrypt(const SimCiphertext& ct) const
{
  return SimPlaintext{ct.slots, ct.log_scale};
}

SimCiphertext Evaluator::trivial(std::span<const double> values,
                                 int level) const
{
  const std::size_t n = params_.slot_count;
  if (values.empty() || n % values.size() != 0)
    throw std::invalid_argument("trivial: length must divide slot_count");
  SimCiphertext ct;
  ct.slots.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    ct.slots[i] = values[i % values.size()];
  ct.level = level;
  ct.log_scale = params_.log_scale;
  ct.noise.assign(n, 0.0);
  return ct;
}

static void check_compatible(const SimCiphertext& a, const SimCiphertext& b)
{
  if (a.level != b.level)
    throw std::logic_error("level mismatch between operands");
  if (a.log_scale != b.log_scale)
    throw std::logic_error("scale mismatch between operands");
  if (a.slots.size() != b.slots.size())
    throw std::logic_error("slot count mismatch between operands");
}

SimCiphertext Evaluator::add(const SimCiphertext& a,
                             const SimCiphertext& b) const
{
  check_compatible(a, b);
  SimCiphertext r = a;
  for (std::size_t i = 0; i < r.slots.size(); ++i) {
    r.slots[i] += b.slots[i];
    r.noise[i] += b.noise[i];
  }
  return r;
}

SimCiphertext Evaluator::sub(const SimCiphertext& a,
                             const SimCiphertext& b) const
{
  check_compatible(a, b);
  SimCiphertext r = a;
  for (std::size_t i = 0; i < r.slots.size(); ++i) {
    r.slots[i] -= b.slots[i];
    r.noise[i] += b.noise[i];
  }
  return r;
}

SimCiphertext Evaluator::negate(const SimCiphertext& a) const
{
  SimCiphertext r = a;
  for (double& x : r.slots)
    x = -x;
  return r;
}

SimCiphertext Evaluator::add_plain(const SimCiphertext& a,
                                   const SimPlaintext& pt) const
{
  check_len(pt.slots.size());
  if (pt.log_scale != a.log_scale)
    throw std::invalid_argument("add_plain: scale mismatch");
  SimCiphertext r = a;
  for (std::size_t i = 0; i < r.slots.size(); ++i)
    r.slots[i] += pt.slots[i];
  return r;
}

SimCiphertext Evaluator::add_const(const SimCiphertext& a, double c) const
{
  SimCiphertext r = a;
  for (double& x : r.slots)
    x += c;
  return r;
}

SimCiphertext Evaluator::pc_mult(const SimPlaintext& pt,
                                 const SimCiphertext& ct)
{
  check_len(pt.slots.size());
  if (pt.log_scale != params_.log_scale)
    throw std::invalid_argument("pc_mult: plaintext not at the context scale");
  SimCiphertext r = ct;
  consume(r);
  ledger_.pc_mults += 1;
  for (std::size_t i = 0; i < r.slots.size(); ++i) {
    r.slots[i] *= pt.slots[i];
    r.noise[i] *= std::abs(pt.slots[i]);
  }
  inject(r, eps_ * max_abs(r.slots));
  return r;
}

SimCiphertext Evaluator::mult_const(const SimCiphertext& ct, double c)
{
  SimCiphertext r = ct;
  consume(r);
  ledger_.pc_mults += 1;
  for (std::size_t i = 0; i < r.slots.size(); ++i) {
    r.slots[i] *= c;
    r.noise[i] *= std::abs(c);
  }
  inject(r, eps_ * max_abs(r.slots));
  return r;
}

SimCiphertext Evaluator::cc_mult(const SimCiphertext& a,
                                 const SimCiphertext& b)
{
  check_compatible(a, b);
  SimCiphertext r = a;
  consume(r);
  ledger_.cc_mults += 1;
  for (std::size_t i = 0; i < r.slots.size(); ++i) {
    r.noise[i] = std::abs(a.slots[i]) * b.noise[i] +
                 std::abs(b.slots[i]) * a.noise[i] + a.noise[i] * b.noise[i];
    r.slots[i] = a.slots[i] * b.slots[i];
  }
  inject(r, eps_ * max_abs(r.slots));
  return r;
}

SimCiphertext Evaluator::rotate(const SimCiphertext& ct, long k)
{
  const long n = static_cast<long>(ct.slots.size());
  if (n == 0 || ((k % n) + n) % n == 0)
    return ct;
  SimCiphertext r = ct;
  r.slots = rotate_slots(ct.slots, k);
  r.noise = rotate_slots(ct.noise, k);
  ledger_.ct_rotations += 1;
  inject(r, eps_ * max_abs(r.slots));
  return r;
}

SimCiphertext Evaluator::drop_level(const SimCiphertext& ct, int level) const
{
  if (level > ct.level)
    throw std::logic_error("drop_level cannot raise the level");
  if (level < 0)
    throw NeedsBootstrap("drop_level below zero");
  SimCiphertext r = ct;
  r.level = level;
  return r;
}

void Evaluator::align(SimCiphertext& a, SimCiphertext& b) const
{
  if (a.level > b.level)
    a.level = b.level;
  else
    b.level = a.level;
}

SimPlaintext Evaluator::pt_rotate(const SimPlaintext& pt, long k)
{
  const long n = static_cast<long>(pt.slots.size());
  if (n == 0 || ((k % n) + n) % n == 0)
    return pt;
  ledger_.pt_rotations += 1;
  return SimPlaintext{rotate_slots(pt.slots, k), pt.log_scale};
}

SimPlaintext Evaluator::pt_add(const SimPlaintext& a,
                               const SimPlaintext& b) const
{
  if (a.log_scale != b.log_scale || a.slots.size() != b.slots.size())
    throw std::invalid_argument("pt_add: operand mismatch");
  SimPlaintext r = a;
  for (std::size_t i = 0; i < r.slots.size(); ++i)
    r.slots[i] += b.slots[i];
  return r;
}

SimPlaintext Evaluator::pt_pt_mult_sqrt_scale(const SimPlaintext& a,
                                              const SimPlaintext& b)
{
  if (params_.log_scale % 2 != 0 || a.log_scale != params_.log_scale / 2 ||
      b.log_scale != params_.log_scale / 2)
    throw std::invalid_argument("operands must be at square-root scale");
  if (a.slots.size() != b.slots.size())
    throw std::invalid_argument("pt_pt_mult: length mismatch");
  SimPlaintext r;
  r.log_scale = params_.log_scale;
  r.slots.resize(a.slots.size());
  for (std::size_t i = 0; i < r.slots.size(); ++i)
    r.slots[i] = a.slots[i] * b.slots[i];
  ledger_.pt_mults += 1;
  return r;
}

SimCiphertext Evaluator::bootstrap(const SimCiphertext& ct)
{
  SimCiphertext r = ct;
  r.level = params_.boot_level;
  ledger_.bootstraps += 1;
  for (std::size_t i = 0; i < r.slots.size(); ++i) {
    double x = std::abs(r.slots[i]);
    // outside [-1,1] the sine approximation degrades quadratically
    r.noise[i] = x > 1 ? eps_ * x * x : eps_;
  }
  if (!exact())
    for (std::size_t i = 0; i < r.slots.size(); ++i)
      r.slots[i] += r.noise[i] * uniform();
  return r;
}

SimCiphertext Evaluator::scaled_bootstrap(const SimCiphertext& ct,
                                          const BoundsProfile& bounds)
{
  bounds.validate(ct.slots.size());
  SimCiphertext r = ct;
  // 1/beta and beta masks are square-root encoded and folded into the
  // bootstrap's linear steps: one extra level overall
  ledger_.bootstraps += 1;
  ledger_.pc_mults += 2;
  ledger_.rescales += 1;
  r.level = params_.boot_level - 1;
  ledger_.min_level_reached = std::min(ledger_.min_level_reached, r.level);
  for (std::size_t i = 0; i < r.slots.size(); ++i) {
    double beta = bounds.per_slot_bound[i];
    double u = std::abs(r.slots[i]) / beta;
    r.noise[i] = u > 1 ? eps_ * beta * u * u : eps_ * beta;
  }
  if (!exact())
    for (std::size_t i = 0; i < r.slots.size(); ++i)
      r.slots[i] += r.noise[i] * uniform();
  return r;
}

} // namespace fhellm
