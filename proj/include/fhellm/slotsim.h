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
#ifndef FHELLM_SLOTSIM_H
#define FHELLM_SLOTSIM_H
/**
 * @file slotsim.h
 * @brief CKKS slot-semantics simulator.
 *
 * Ciphertexts are plain vectors of real slots annotated with a level, a
 * scale exponent and a per-slot absolute error bound. Every homomorphic
 * operation goes through an Evaluator which enforces the level rules and
 * counts costs in a CostLedger.
 */
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fhellm {

//! Raised when an operation needs a level the ciphertext no longer has.
class NeedsBootstrap : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct SimParams
{
  std::size_t slot_count = 1024;
  int top_level = 12;
  int boot_level = 8;
  int log_scale = 40;
  std::optional<int> noise_bits = 30;
  std::uint64_t seed = 0;

  void validate() const;
  bool exact() const { return !noise_bits.has_value(); }
};

struct SimPlaintext
{
  std::vector<double> slots;
  int log_scale = 0;
};

struct SimCiphertext
{
  std::vector<double> slots;
  int level = 0;
  int log_scale = 0;
  std::vector<double> noise; // per-slot absolute error bound

  double noise_est() const;
  std::size_t size() const { return slots.size(); }
};

struct CostLedger
{
  std::uint64_t ct_rotations = 0;
  std::uint64_t cc_mults = 0;
  std::uint64_t pc_mults = 0;
  std::uint64_t pt_rotations = 0;
  std::uint64_t pt_mults = 0;
  std::uint64_t rescales = 0;
  std::uint64_t bootstraps = 0;
  int min_level_reached = 0;

  CostLedger& operator+=(const CostLedger& o);
  //! Counter difference; min_level_reached is taken from *this.
  CostLedger operator-(const CostLedger& o) const;
  bool operator==(const CostLedger& o) const = default;
};

struct BoundsProfile
{
  std::vector<double> per_slot_bound;

  static BoundsProfile uniform(std::size_t n, double beta);
  void validate(std::size_t slot_count) const;
};

class Evaluator
{
public:
  explicit Evaluator(const SimParams& params);

  const SimParams& params() const { return params_; }
  std::size_t slots() const { return params_.slot_count; }
  bool exact() const { return params_.exact(); }
  //! 2^-p, or 0 in exact mode.
  double eps() const { return eps_; }

  CostLedger& ledger() { return ledger_; }
  const CostLedger& ledger() const { return ledger_; }
  void reset_ledger();

  //! Fresh evaluator sharing the parameters, with an empty ledger and an
  //! independent noise stream. Used for per-task ledgers.
  Evaluator fork(std::uint64_t stream) const;
  void merge(const Evaluator& child);

  // Encoding. Shorter inputs are repeated periodically.
  SimPlaintext encode(std::span<const double> values, int log_scale);
  SimPlaintext encode(std::span<const double> values)
  {
    return encode(values, params_.log_scale);
  }
  //! Encoding at half scale (square-root encoding).
  SimPlaintext encode_sqrt(std::span<const double> values);
  SimPlaintext encode_const(double c) { return encode(std::vector<double>{c}); }
  static std::vector<double> decode(const SimPlaintext& pt) { return pt.slots; }

  SimCiphertext encrypt(const SimPlaintext& pt);
  SimCiphertext encrypt(std::span<const double> values)
  {
    return encrypt(encode(values));
  }
  SimPlaintext decrypt(const SimCiphertext& ct) const;
  std::vector<double> decrypt_values(const SimCiphertext& ct) const
  {
    return ct.slots;
  }

  //! Noise-free ciphertext holding known values, as produced by a
  //! trivial encryption.
  SimCiphertext trivial(std::span<const double> values, int level) const;

  SimCiphertext add(const SimCiphertext& a, const SimCiphertext& b) const;
  SimCiphertext sub(const SimCiphertext& a, const SimCiphertext& b) const;
  SimCiphertext negate(const SimCiphertext& a) const;
  SimCiphertext add_plain(const SimCiphertext& a, const SimPlaintext& pt) const;
  SimCiphertext add_const(const SimCiphertext& a, double c) const;

  SimCiphertext pc_mult(const SimPlaintext& pt, const SimCiphertext& ct);
  SimCiphertext mult_const(const SimCiphertext& ct, double c);
  SimCiphertext cc_mult(const SimCiphertext& a, const SimCiphertext& b);
  SimCiphertext square(const SimCiphertext& a) { return cc_mult(a, a); }
  SimCiphertext rotate(const SimCiphertext& ct, long k);

  //! Modulus switch to a lower level; free.
  SimCiphertext drop_level(const SimCiphertext& ct, int level) const;
  //! Drop the higher of the two to the lower level.
  void align(SimCiphertext& a, SimCiphertext& b) const;

  SimPlaintext pt_rotate(const SimPlaintext& pt, long k);
  SimPlaintext pt_add(const SimPlaintext& a, const SimPlaintext& b) const;
  SimPlaintext pt_pt_mult_sqrt_scale(const SimPlaintext& a,
                                     const SimPlaintext& b);

  SimCiphertext bootstrap(const SimCiphertext& ct);
  SimCiphertext scaled_bootstrap(const SimCiphertext& ct,
                                 const BoundsProfile& bounds);

private:
  void check_len(std::size_t n) const;
  void consume(SimCiphertext& ct);
  void inject(SimCiphertext& ct, double magnitude);
  double uniform();

  SimParams params_;
  double eps_ = 0;
  CostLedger ledger_;
  std::mt19937_64 rng_;
};

//! Left cyclic rotation of a slot vector.
std::vector<double> rotate_slots(std::span<const double> v, long k);

double max_abs(std::span<const double> v);

} // namespace fhellm

#endif // FHELLM_SLOTSIM_H
