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
#include "fhellm/bitrev.h"

#include <stdexcept>
#include <vector>
#include <string>

namespace fhellm {

namespace {

void check_range(std::uint32_t x, int k)
{
  if (k < 0 || k > 31)
    throw std::invalid_argument("bit width must be in [0, 31]");
  if (x >= (std::uint32_t{1} << k))
    throw std::out_of_range("value " + std::to_string(x) + " needs more than " +
                            std::to_string(k) + " bits");
}

} // namespace

std::uint32_t bit_reverse(std::uint32_t x, int k)
{
  check_range(x, k);
  std::uint32_t r = 0;
  for (int i = 0; i < k; ++i)
    r |= ((x >> i) & 1u) << (k - 1 - i);
  return r;
}

std::uint32_t perm_f(std::uint32_t x, int k)
{
  check_range(x, k);
  if (k == 0)
    return x;
  return (x >> 1) | ((x & 1u) << (k - 1));
}

std::uint32_t perm_g(std::uint32_t x)
{
  check_range(x, 8);
  // source bit for each output position, LSB first
  static constexpr int src[8] = {2, 1, 0, 7, 6, 5, 4, 3};
  std::uint32_t r = 0;
  for (int i = 0; i < 8; ++i)
    r |= ((x >> src[i]) & 1u) << i;
  return r;
}

std::uint32_t perm_h(std::uint32_t x)
{
  check_range(x, 12);
  std::uint32_t top = x & 2048u;
  return top | bit_reverse(x & 2047u, 11);
}

void PermSpec::validate() const
{
  if (kind == PermKind::g && width != 8)
    throw std::invalid_argument("g is defined on 8 bits");
  if (kind == PermKind::h && width != 12)
    throw std::invalid_argument("h is defined on 12 bits");
  if (width < 0 || width > 31)
    throw std::invalid_argument("bit width must be in [0, 31]");
}

std::uint32_t PermSpec::operator()(std::uint32_t x) const
{
  switch (kind) {
  case PermKind::bitreverse:
    return bit_reverse(x, width);
  case PermKind::f:
    return perm_f(x, width);
  case PermKind::g:
    return perm_g(x);
  case PermKind::h:
    return perm_h(x);
  }
  throw std::logic_error("unknown permutation");
}

ClearMatrix shuffle_matrix(const ClearMatrix& m, const PermSpec& p)
{
  p.validate();
  const auto n = static_cast<Eigen::Index>(p.domain());
  if (m.rows() != n || m.cols() != n)
    throw std::invalid_argument("matrix size does not match the permutation");
  std::vector<Eigen::Index> idx(n);
  for (Eigen::Index i = 0; i < n; ++i)
    idx[i] = p(static_cast<std::uint32_t>(i));
  ClearMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = m(idx[i], idx[j]);
  return out;
}

namespace {

bool is_bijection(const PermSpec& p)
{
  std::vector<char> seen(p.domain(), 0);
  for (std::uint32_t x = 0; x < p.domain(); ++x) {
    std::uint32_t y = p(x);
    if (y >= p.domain() || seen[y])
      return false;
    seen[y] = 1;
  }
  return true;
}

bool is_involution(const PermSpec& p)
{
  for (std::uint32_t x = 0; x < p.domain(); ++x)
    if (p(p(x)) != x)
      return false;
  return true;
}

} // namespace

std::vector<PropertyResult> bitrev_properties(std::uint64_t seed, int trials)
{
  std::vector<PropertyResult> out;
  auto add = [&](std::string name, bool ok) {
    out.push_back({std::move(name), ok});
  };
  bool rev_ok = true;
  for (int k = 0; k <= 12; ++k) {
    PermSpec p{PermKind::bitreverse, k};
    rev_ok = rev_ok && is_bijection(p) && is_involution(p);
  }
  add("bit_reverse bijective involution, k <= 12", rev_ok);
  add("f bijective on [0,256)", is_bijection({PermKind::f, 8}));
  add("g bijective on [0,256)", is_bijection({PermKind::g, 8}));
  add("h bijective on [0,4096)", is_bijection({PermKind::h, 12}));
  add("g involution", is_involution({PermKind::g, 8}));
  add("h involution", is_involution({PermKind::h, 12}));

  bool ident = true;
  for (std::uint32_t i = 0; i < 16; ++i)
    for (std::uint32_t j = 0; j < 16; ++j)
      ident = ident && perm_g(16 * i + j) == perm_f(bit_reverse(i + 16 * j, 8), 8);
  add("g(16i+j) = f(bit_reverse(i+16j), 8) on all 256 points", ident);

  const PermSpec g{PermKind::g, 8};
  ClearMatrix eye = ClearMatrix::Identity(256, 256);
  add("shuffle fixes identity", shuffle_matrix(eye, g) == eye);
  bool hom = true, twice = true;
  for (int t = 0; t < trials; ++t) {
    ClearMatrix a = random_matrix(256, 256, seed + 2 * t);
    ClearMatrix b = random_matrix(256, 256, seed + 2 * t + 1);
    ClearMatrix lhs = shuffle_matrix(a, g) * shuffle_matrix(b, g);
    ClearMatrix rhs = shuffle_matrix(a * b, g);
    hom = hom && (lhs - rhs).cwiseAbs().maxCoeff() < 1e-9;
    twice = twice && shuffle_matrix(shuffle_matrix(a, g), g) == a;
  }
  add("shuffle twice is the identity", twice);
  add("shuffle conjugation is multiplicative", hom);
  return out;
}

} // namespace fhellm
