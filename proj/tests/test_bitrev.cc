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
#include <doctest.h>

#include <set>

#include "fhellm/bitrev.h"
#include "test_util.h"

using namespace fhellm;

TEST_CASE("bit reversal")
{
  CHECK(bit_reverse(1, 3) == 4);
  CHECK(bit_reverse(6, 3) == 3);
  for (int k = 1; k <= 12; ++k) {
    CHECK(bit_reverse(0, k) == 0);
    for (std::uint32_t x = 0; x < (1u << k); ++x)
      CHECK(bit_reverse(bit_reverse(x, k), k) == x);
  }
  CHECK_THROWS(bit_reverse(8, 3));
}

TEST_CASE("lowest bit to the top")
{
  CHECK(perm_f(0, 8) == 0);
  CHECK(perm_f(2, 8) == 1);
  CHECK(perm_f(1, 8) == 128);
  CHECK(perm_f(3, 8) == 129);
  std::set<std::uint32_t> img;
  for (std::uint32_t x = 0; x < 256; ++x)
    img.insert(perm_f(x, 8));
  CHECK(img.size() == 256);
  CHECK_THROWS(perm_f(256, 8));
}

TEST_CASE("the byte permutation")
{
  CHECK(perm_g(0) == 0);
  CHECK(perm_g(255) == 255);
  CHECK(perm_g(1) == 4);
  CHECK(perm_g(4) == 1);
  std::set<std::uint32_t> img;
  for (std::uint32_t x = 0; x < 256; ++x) {
    CHECK(perm_g(perm_g(x)) == x);
    img.insert(perm_g(x));
  }
  CHECK(img.size() == 256);
  for (std::uint32_t i = 0; i < 16; ++i)
    for (std::uint32_t j = 0; j < 16; ++j)
      CHECK(perm_g(16 * i + j) == perm_f(bit_reverse(i + 16 * j, 8), 8));
  CHECK_THROWS(perm_g(256));
}

TEST_CASE("half-preserving reversal")
{
  CHECK(perm_h(0) == 0);
  CHECK(perm_h(2048) == 2048);
  CHECK(perm_h(1) == 1024);
  std::set<std::uint32_t> img;
  for (std::uint32_t x = 0; x < 4096; ++x) {
    CHECK(perm_h(perm_h(x)) == x);
    img.insert(perm_h(x));
  }
  CHECK(img.size() == 4096);
  CHECK_THROWS(perm_h(4096));
}

TEST_CASE("matrix shuffles")
{
  PermSpec g;
  ClearMatrix id = ClearMatrix::Identity(256, 256);
  CHECK(shuffle_matrix(id, g) == id);
  ClearMatrix a = random_matrix(256, 256, 1), b = random_matrix(256, 256, 2);
  CHECK(shuffle_matrix(shuffle_matrix(a, g), g) == a);
  ClearMatrix lhs = shuffle_matrix(a, g) * shuffle_matrix(b, g);
  CHECK(test::max_diff(lhs, shuffle_matrix(a * b, g)) < 1e-9);
  CHECK_THROWS(shuffle_matrix(ClearMatrix::Zero(8, 8), g));
  CHECK_THROWS(PermSpec{PermKind::g, 7}.validate());
}

TEST_CASE("property suite")
{
  for (const auto& r : bitrev_properties(3, 1))
    CHECK_MESSAGE(r.passed, r.name);
}
