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
#ifndef FHELLM_SERIES_H
#define FHELLM_SERIES_H
/**
 * @file series.h
 * @brief Coefficient-vector algebra for monomial and Chebyshev series on
 * [-1,1], and polynomial root finding.
 *
 * Coefficients are stored lowest degree first.
 */
#include <complex>
#include <span>
#include <vector>

namespace fhellm {

using Series = std::vector<double>;
using CSeries = std::vector<std::complex<double>>;

//! Drop trailing coefficients with |c| <= tol (keeps at least one entry).
void trim(Series& c, double tol = 0.0);
int degree(std::span<const double> c);

double cheb_eval(std::span<const double> c, double t);
std::complex<double> cheb_eval(std::span<const double> c,
                               std::complex<double> t);
std::complex<double> cheb_eval(std::span<const std::complex<double>> c,
                               std::complex<double> t);
double mono_eval(std::span<const double> c, double x);
std::complex<double> mono_eval(std::span<const double> c,
                               std::complex<double> x);

Series cheb_mul(std::span<const double> a, std::span<const double> b);
CSeries cheb_mul(std::span<const std::complex<double>> a,
                 std::span<const std::complex<double>> b);
//! t * c(t)
CSeries cheb_mulx(std::span<const std::complex<double>> c);
Series cheb_der(std::span<const double> c);
Series mono_der(std::span<const double> c);
Series series_add(std::span<const double> a, std::span<const double> b);
Series series_sub(std::span<const double> a, std::span<const double> b);
Series series_scale(std::span<const double> a, double s);
Series mono_mul(std::span<const double> a, std::span<const double> b);

Series cheb_to_mono(std::span<const double> c);
Series mono_to_cheb(std::span<const double> c);

//! Largest |coefficient|.
double max_coeff(std::span<const double> c);

/**
 * Roots of a Chebyshev series from the eigenvalues of its balanced
 * colleague matrix, refined by Newton steps.
 */
std::vector<std::complex<double>> cheb_roots(std::span<const double> c);
//! Roots of a monomial series (balanced companion matrix + Newton).
std::vector<std::complex<double>> mono_roots(std::span<const double> c);

} // namespace fhellm

#endif // FHELLM_SERIES_H
