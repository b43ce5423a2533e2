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
#ifndef FHELLM_POLYAPPROX_H
#define FHELLM_POLYAPPROX_H
/**
 * @file polyapprox.h
 * @brief Chebyshev interpolation of the non-linear layers and
 * depth-optimal Paterson-Stockmeyer evaluation on ciphertexts.
 */
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fhellm/series.h"
#include "fhellm/slotsim.h"

namespace fhellm {

enum class Basis
{
  monomial,
  chebyshev
};

/**
 * A polynomial on [lo, hi]. Chebyshev coefficients refer to the
 * normalized variable t = (2x - lo - hi) / (hi - lo); monomial
 * coefficients refer to x itself.
 */
struct ApproxPoly
{
  Basis basis = Basis::chebyshev;
  std::vector<double> coeffs;
  double lo = -1.0;
  double hi = 1.0;
  std::string target;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double to_t(double x) const { return (2.0 * x - lo - hi) / (hi - lo); }
  double from_t(double t) const { return 0.5 * ((hi - lo) * t + lo + hi); }
};

//! Input ranges of the non-linear layers.
struct RangeTable
{
  double silu_lo = -16.0, silu_hi = 16.0;           // most dimensions
  double silu_wide_lo = -24.0, silu_wide_hi = 24.0; // outlier dimensions
  double invsqrt_lo = 0.18257418583505536;          // 1/sqrt(30)
  double invsqrt_hi = 5.477225575051661;            // sqrt(30)
  double softmax_M = 32.78;
  int softmax_k = 2;
};

//! exp, silu, invsqrt; anything else throws.
std::function<double(double)> named_function(const std::string& name);

//! Interpolant at the degree+1 Chebyshev nodes of the first kind.
ApproxPoly chebyshev_fit(const std::function<double(double)>& f, double lo,
                         double hi, int degree, std::string target = "");
//! Max |p - f| on an even grid of `points` samples (default 10*degree).
double sup_error(const ApproxPoly& p, const std::function<double(double)>& f,
                 int points = 0);

double eval_clear(const ApproxPoly& p, double x);
ApproxPoly to_monomial(const ApproxPoly& p);
ApproxPoly to_chebyshev(const ApproxPoly& p);
//! Monomial coefficients in u = x - center, center = (lo+hi)/2.
Series centered_monomial(const ApproxPoly& p);

//! ceil(log2(degree + 1)).
int ps_depth(int degree);

//! Whether the ciphertext holds x itself or the normalized variable t.
enum class Domain
{
  raw,
  normalized
};

/**
 * Evaluate p on every slot, consuming exactly ps_depth(degree) levels.
 * Raw inputs: Chebyshev series are re-expanded around the interval
 * center first. Normalized inputs: Chebyshev series only, evaluated in
 * the Chebyshev basis.
 */
SimCiphertext ps_eval_ct(Evaluator& ev, const ApproxPoly& p,
                         const SimCiphertext& ct, Domain domain = Domain::raw);

/**
 * Slot i of the result is sum_s v_i^(s) T_s(x_i) (or x_i^s), where
 * coeff_pts[s] holds v^(s). `depth` defaults to ps_depth; a monic
 * power-of-two degree may use one level less.
 */
SimCiphertext ps_eval_pt_coeffs(Evaluator& ev,
                                const std::vector<SimPlaintext>& coeff_pts,
                                const SimCiphertext& ct,
                                Basis basis = Basis::monomial,
                                std::optional<int> depth = std::nullopt);

//! Smallest depth ps_eval_pt_coeffs accepts for these coefficients.
int ps_min_depth(const std::vector<std::vector<double>>& coeffs);

//! x -> (2x - lo - hi) / (hi - lo); one level.
SimCiphertext normalize_input(Evaluator& ev, const SimCiphertext& ct,
                              double lo, double hi);
//! Same with per-slot intervals; one level.
SimCiphertext normalize_input(Evaluator& ev, const SimCiphertext& ct,
                              const std::vector<double>& lo,
                              const std::vector<double>& hi);

} // namespace fhellm

#endif // FHELLM_POLYAPPROX_H
