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
#ifndef FHELLM_BITREV_H
#define FHELLM_BITREV_H
/**
 * @file bitrev.h
 * @brief Bit-reversal index permutations used when converting between
 * slot and coefficient encodings, and the matching matrix shuffles.
 */
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fhellm/packing.h"

namespace fhellm {

std::uint32_t bit_reverse(std::uint32_t x, int k);
//! Moves the lowest bit of a k-bit x to the top.
std::uint32_t perm_f(std::uint32_t x, int k);
//! a7..a0 -> a3 a4 a5 a6 a7 a0 a1 a2 on [0, 256).
std::uint32_t perm_g(std::uint32_t x);
//! Keeps bit 11 and reverses the 11 lower bits, on [0, 4096).
std::uint32_t perm_h(std::uint32_t x);

enum class PermKind
{
  bitreverse,
  f,
  g,
  h
};

struct PermSpec
{
  PermKind kind = PermKind::g;
  int width = 8;

  std::uint32_t domain() const { return std::uint32_t{1} << width; }
  std::uint32_t operator()(std::uint32_t x) const;
  //! g fixes width 8 and h width 12.
  void validate() const;
};

//! out(i, j) = m(p(i), p(j)); m must be 2^width square.
ClearMatrix shuffle_matrix(const ClearMatrix& m, const PermSpec& p);

struct PropertyResult
{
  std::string name;
  bool passed = false;
};

//! Domain-exhaustive bijection, involution and identity checks, plus the
//! shuffle-conjugation property on `trials` random 256x256 matrices.
std::vector<PropertyResult> bitrev_properties(std::uint64_t seed = 0,
                                              int trials = 1);

} // namespace fhellm

#endif // FHELLM_BITREV_H
