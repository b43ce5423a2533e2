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
#include "fhellm/series.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace fhellm {

void trim(Series& c, double tol)
{
  while (c.size() > 1 && std::abs(c.back()) <= tol)
    c.pop_back();
  if (c.empty())
    c.push_back(0.0);
}

int degree(std::span<const double> c)
{
  int n = static_cast<int>(c.size()) - 1;
  while (n > 0 && c[n] == 0.0)
    --n;
  return std::max(n, 0);
}

namespace {

template <class C, class T>
T clenshaw(std::span<const C> c, T t)
{
  if (c.empty())
    return T(0);
  T b1(0), b2(0);
  for (std::size_t k = c.size() - 1; k >= 1; --k) {
    T b0 = T(2) * t * b1 - b2 + T(c[k]);
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + T(c[0]);
}

template <class C, class T>
T horner(std::span<const C> c, T x)
{
  T r(0);
  for (std::size_t k = c.size(); k-- > 0;)
    r = r * x + T(c[k]);
  return r;
}

template <class T>
std::vector<T> cheb_mul_impl(std::span<const T> a, std::span<const T> b)
{
  if (a.empty() || b.empty())
    return {};
  std::vector<T> r(a.size() + b.size() - 1, T(0));
  // T_i T_j = (T_{i+j} + T_{|i-j|}) / 2
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      T p = a[i] * b[j] * 0.5;
      r[i + j] += p;
      r[i > j ? i - j : j - i] += p;
    }
  return r;
}

void balance(Eigen::MatrixXd& m)
{
  const int n = static_cast<int>(m.rows());
  const double radix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (int i = 0; i < n; ++i) {
      double c = 0, r = 0;
      for (int j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(m(j, i));
          r += std::abs(m(i, j));
        }
      if (c == 0 || r == 0)
        continue;
      double g = r / radix, f = 1.0, s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
}

std::vector<std::complex<double>> eigenvalues(Eigen::MatrixXd m)
{
  balance(m);
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue iteration did not converge");
  std::vector<std::complex<double>> out(es.eigenvalues().data(),
                                        es.eigenvalues().data() +
                                            es.eigenvalues().size());
  return out;
}

template <class F, class DF>
void polish(std::vector<std::complex<double>>& roots, F f, DF df)
{
  for (auto& z : roots) {
    std::complex<double> fz = f(z);
    for (int it = 0; it < 8; ++it) {
      std::complex<double> d = df(z);
      if (d == 0.0)
        break;
      std::complex<double> zn = z - fz / d;
      std::complex<double> fn = f(zn);
      if (!(std::abs(fn) < std::abs(fz)))
        break;
      z = zn;
      fz = fn;
    }
  }
}

} // namespace

double cheb_eval(std::span<const double> c, double t)
{
  return clenshaw<double, double>(c, t);
}

std::complex<double> cheb_eval(std::span<const double> c,
                               std::complex<double> t)
{
  return clenshaw<double, std::complex<double>>(c, t);
}

std::complex<double> cheb_eval(std::span<const std::complex<double>> c,
                               std::complex<double> t)
{
  return clenshaw<std::complex<double>, std::complex<double>>(c, t);
}

double mono_eval(std::span<const double> c, double x)
{
  return horner<double, double>(c, x);
}

std::complex<double> mono_eval(std::span<const double> c,
                               std::complex<double> x)
{
  return horner<double, std::complex<double>>(c, x);
}

Series cheb_mul(std::span<const double> a, std::span<const double> b)
{
  return cheb_mul_impl<double>(a, b);
}

CSeries cheb_mul(std::span<const std::complex<double>> a,
                 std::span<const std::complex<double>> b)
{
  return cheb_mul_impl<std::complex<double>>(a, b);
}

CSeries cheb_mulx(std::span<const std::complex<double>> c)
{
  // t T_0 = T_1, t T_n = (T_{n+1} + T_{n-1}) / 2
  CSeries r(c.size() + 1, 0.0);
  for (std::size_t n = 0; n < c.size(); ++n) {
    if (n == 0) {
      r[1] += c[0];
    } else {
      r[n + 1] += 0.5 * c[n];
      r[n - 1] += 0.5 * c[n];
    }
  }
  return r;
}

Series cheb_der(std::span<const double> c)
{
  const int n = static_cast<int>(c.size()) - 1;
  if (n <= 0)
    return Series{0.0};
  Series d(n, 0.0);
  // backward recurrence d_{k-1} = d_{k+1} + 2k c_k
  Series w(n + 2, 0.0);
  for (int k = n; k >= 1; --k)
    w[k - 1] = w[k + 1] + 2.0 * k * c[k];
  for (int k = 0; k < n; ++k)
    d[k] = w[k];
  d[0] *= 0.5;
  return d;
}

Series mono_der(std::span<const double> c)
{
  if (c.size() <= 1)
    return Series{0.0};
  Series d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k)
    d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

Series series_add(std::span<const double> a, std::span<const double> b)
{
  Series r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i)
    r[i] += b[i];
  return r;
}

Series series_sub(std::span<const double> a, std::span<const double> b)
{
  Series r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i)
    r[i] -= b[i];
  return r;
}

Series series_scale(std::span<const double> a, double s)
{
  Series r(a.begin(), a.end());
  for (double& x : r)
    x *= s;
  return r;
}

Series mono_mul(std::span<const double> a, std::span<const double> b)
{
  if (a.empty() || b.empty())
    return {};
  Series r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] += a[i] * b[j];
  return r;
}

Series cheb_to_mono(std::span<const double> c)
{
  const std::size_t n = c.size();
  Series out(std::max<std::size_t>(n, 1), 0.0);
  if (n == 0)
    return out;
  Series tkm1{1.0}, tk{0.0, 1.0};
  out[0] += c[0];
  if (n > 1)
    out[1] += c[1];
  for (std::size_t k = 2; k < n; ++k) {
    Series tn(k + 1, 0.0);
    for (std::size_t i = 0; i < tk.size(); ++i)
      tn[i + 1] += 2.0 * tk[i];
    for (std::size_t i = 0; i < tkm1.size(); ++i)
      tn[i] -= tkm1[i];
    for (std::size_t i = 0; i <= k; ++i)
      out[i] += c[k] * tn[i];
    tkm1 = std::move(tk);
    tk = std::move(tn);
  }
  return out;
}

Series mono_to_cheb(std::span<const double> c)
{
  // Horner in the Chebyshev basis: r <- t*r + c_k
  CSeries r{0.0};
  for (std::size_t k = c.size(); k-- > 0;) {
    r = cheb_mulx(r);
    r[0] += c[k];
  }
  Series out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    out[i] = r[i].real();
  trim(out);
  if (out.size() > c.size() && !c.empty())
    out.resize(c.size());
  return out;
}

double max_coeff(std::span<const double> c)
{
  double m = 0;
  for (double x : c)
    m = std::max(m, std::abs(x));
  return m;
}

std::vector<std::complex<double>> cheb_roots(std::span<const double> cin)
{
  Series c(cin.begin(), cin.end());
  trim(c);
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1)
    return {};
  std::vector<std::complex<double>> roots;
  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
  } else {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    const double h = std::sqrt(0.5);
    m(0, 1) = m(1, 0) = h;
    for (int i = 1; i + 1 < n; ++i)
      m(i, i + 1) = m(i + 1, i) = 0.5;
    for (int i = 0; i < n; ++i) {
      double scl_i = i == 0 ? 1.0 : h;
      double scl_last = n - 1 == 0 ? 1.0 : h;
      m(i, n - 1) -= (c[i] / c[n]) * (scl_i / scl_last) * 0.5;
    }
    roots = eigenvalues(m);
  }
  Series dc = cheb_der(c);
  polish(
      roots, [&](std::complex<double> z) { return cheb_eval(c, z); },
      [&](std::complex<double> z) { return cheb_eval(dc, z); });
  return roots;
}

std::vector<std::complex<double>> mono_roots(std::span<const double> cin)
{
  Series c(cin.begin(), cin.end());
  trim(c);
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1)
    return {};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i)
    m(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i)
    m(i, n - 1) = -c[i] / c[n];
  std::vector<std::complex<double>> roots = eigenvalues(m);
  Series dc = mono_der(c);
  polish(
      roots, [&](std::complex<double> z) { return mono_eval(c, z); },
      [&](std::complex<double> z) { return mono_eval(dc, z); });
  return roots;
}

} // namespace fhellm
