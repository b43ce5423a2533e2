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
#include "fhellm/softmax.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fhellm {

namespace {

bool pow2(long n) { return n > 0 && (n & (n - 1)) == 0; }

int log2i(long n) { return std::bit_width(static_cast<unsigned long>(n)) - 1; }

} // namespace

void SoftmaxConfig::validate() const
{
  if (!pow2(d))
    throw std::invalid_argument("softmax length must be a power of two");
  if (!(M > 0))
    throw std::invalid_argument("softmax range M must be positive");
  if (k < 1)
    throw std::invalid_argument("softmax needs at least one iteration");
  if (exp_degree < 1)
    throw std::invalid_argument("exp degree must be positive");
  for (auto [deg, j] : {std::pair{invsqrt_degree, j_last},
                        std::pair{invsqrt_mid_degree, j_mid}}) {
    if (!pow2(deg) || deg < 2)
      throw std::invalid_argument("inverse square root degree must be 2^k");
    if (j < 0 || j >= log2i(deg))
      throw std::invalid_argument("slim depth must satisfy 0 <= j < k");
  }
  if (calib_margin < 1.0)
    throw std::invalid_argument("calibration margin must be >= 1");
  if (!invsqrt_intervals.empty()) {
    if (static_cast<int>(invsqrt_intervals.size()) != k)
      throw std::invalid_argument("need one interval per iteration");
    for (auto [lo, hi] : invsqrt_intervals)
      if (!(lo > 0 && lo < hi))
        throw std::invalid_argument("intervals must satisfy 0 < lo < hi");
  }
}

int SoftmaxConfig::main_depth() const { return 2 * k + ps_depth(exp_degree); }

std::vector<double> softmax_clear(const std::vector<double>& x)
{
  if (x.empty())
    return {};
  double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> y(x.size());
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += y[i] = std::exp(x[i] - mx);
  for (double& v : y)
    v /= s;
  return y;
}

ClearMatrix colwise_softmax(const ClearMatrix& m)
{
  ClearMatrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    std::vector<double> col(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      col[i] = m(i, j);
    auto s = softmax_clear(col);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      out(i, j) = s[i];
  }
  return out;
}

SimCiphertext strided_norm_sq(Evaluator& ev, const SimCiphertext& ct, int d,
                              int stride)
{
  if (!pow2(d) || stride < 1 ||
      static_cast<std::size_t>(d) * stride > ev.slots())
    throw std::invalid_argument("strided_norm_sq: bad length or stride");
  SimCiphertext r = ev.square(ct);
  for (long step = 1; step < d; step *= 2)
    r = ev.add(r, ev.rotate(r, step * stride));
  return r;
}

std::vector<Interval>
calibrate_intervals(const SoftmaxConfig& cfg,
                    const std::vector<std::vector<double>>& samples)
{
  cfg.validate();
  if (!cfg.invsqrt_intervals.empty())
    return cfg.invsqrt_intervals;
  std::vector<std::vector<double>> xs = samples;
  if (xs.empty()) {
    std::mt19937_64 rng(cfg.seed);
    for (int s = 0; s < cfg.calib_samples; ++s) {
      std::vector<double> x(cfg.d);
      for (double& v : x)
        v = -cfg.M * ((rng() >> 11) * 0x1p-53);
      xs.push_back(std::move(x));
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Interval> seen(cfg.k, {inf, 0.0});
  const double scale = std::ldexp(1.0, -cfg.k);
  for (const auto& x : xs) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      y[i] = std::exp(x[i] * scale);
    for (int it = 0; it < cfg.k; ++it) {
      double s = 0;
      for (double v : y)
        s += v * v;
      seen[it].first = std::min(seen[it].first, s);
      seen[it].second = std::max(seen[it].second, s);
      for (double& v : y)
        v = v * v / s;
    }
  }
  std::vector<Interval> out;
  for (int it = 0; it < cfg.k; ++it) {
    if (it == cfg.k - 1 && cfg.k >= 2)
      out.emplace_back(0.5 / cfg.d, 1.5);
    else
      out.emplace_back(seen[it].first / cfg.calib_margin,
                       seen[it].second * cfg.calib_margin);
  }
  return out;
}

SoftmaxKernel::SoftmaxKernel(SoftmaxConfig cfg,
                             const std::vector<std::vector<double>>& samples)
    : cfg_(std::move(cfg))
{
  cfg_.validate();
  const double scale = std::ldexp(1.0, -cfg_.k);
  exp_ = chebyshev_fit([scale](double x) { return std::exp(x * scale); },
                       -cfg_.M, 0.0, cfg_.exp_degree, "exp");
  intervals_ = calibrate_intervals(cfg_, samples);
  auto invsqrt = named_function("invsqrt");
  for (int it = 0; it < cfg_.k; ++it) {
    bool last = it == cfg_.k - 1;
    auto [lo, hi] = intervals_[it];
    TreeOptions to;
    to.j = last ? cfg_.j_last : cfg_.j_mid;
    // Past machine precision the top coefficients are rounding noise and
    // their roots are meaningless, so halve while nothing is lost or the
    // decomposition is rejected.
    int deg = last ? cfg_.invsqrt_degree : cfg_.invsqrt_mid_degree;
    ApproxPoly p = chebyshev_fit(invsqrt, lo, hi, deg, "invsqrt");
    const double floor = 1e-12 / std::sqrt(lo);
    while (deg / 2 > (1 << to.j)) {
      ApproxPoly half = chebyshev_fit(invsqrt, lo, hi, deg / 2, "invsqrt");
      if (sup_error(half, invsqrt) > floor)
        break;
      p = std::move(half);
      deg /= 2;
    }
    for (;;) {
      try {
        trees_.push_back(build_tree(p, to));
        break;
      } catch (const std::domain_error&) {
        if (deg / 2 <= (1 << to.j))
          throw;
        deg /= 2;
        p = chebyshev_fit(invsqrt, lo, hi, deg, "invsqrt");
      }
    }
  }
}

SimCiphertext SoftmaxKernel::run(Evaluator& ev, const SimCiphertext& ct,
                                 int stride, TrackReport* report) const
{
  const std::size_t n = ev.slots();
  const std::size_t period = static_cast<std::size_t>(cfg_.d) * stride;
  if (!pow2(stride) || period > n || n % period != 0)
    throw std::invalid_argument("softmax: stride must be a power of two with "
                                "d*stride dividing the slot count");
  if (ct.level < cfg_.main_depth())
    throw NeedsBootstrap("softmax main track needs " +
                         std::to_string(cfg_.main_depth()) + " levels");
  const int start = ct.level;
  const auto boots = ev.ledger().bootstraps;
  const int t_bits = log2i(stride);

  SimCiphertext y = ps_eval_ct(ev, exp_, ct, Domain::raw);
  for (int it = 0; it < cfg_.k; ++it) {
    auto [lo, hi] = intervals_[it];
    const SosTree& tr = trees_[it];
    SimCiphertext s = strided_norm_sq(ev, y, cfg_.d, stride);
    s = ev.scaled_bootstrap(s, BoundsProfile::uniform(n, hi));
    SimCiphertext r = prepare_slim_input(ev, s, tr, t_bits, cfg_.fused);
    r = slim_eval(ev, tr, r, t_bits, cfg_.fused);
    r = ev.scaled_bootstrap(r, BoundsProfile::uniform(n, 1.05 / std::sqrt(lo)));
    if (r.level < y.level)
      throw NeedsBootstrap("auxiliary track ends below the main track level; "
                           "raise boot_level");
    r = ev.drop_level(r, y.level);
    y = ev.square(ev.cc_mult(y, r));
  }
  if (report) {
    report->main_levels_used = start - y.level;
    report->aux_bootstraps =
        static_cast<int>(ev.ledger().bootstraps - boots);
  }
  return y;
}

std::pair<SimCiphertext, TrackReport>
softmax_encrypted(Evaluator& ev, const SimCiphertext& ct,
                  const SoftmaxConfig& cfg)
{
  SoftmaxKernel kernel(cfg);
  TrackReport rep;
  SimCiphertext out = kernel.run(ev, ct, 1, &rep);
  return {out, rep};
}

PackedMatrix softmax_on_tau_packed(Evaluator& ev, const PackedMatrix& pm,
                                   const SoftmaxKernel& kernel,
                                   TrackReport* report)
{
  if (pm.tau_power != 1)
    throw std::invalid_argument("softmax_on_tau_packed expects tau power 1");
  if (kernel.config().d != pm.dim)
    throw std::invalid_argument("softmax length differs from the dimension");
  const std::size_t dd = static_cast<std::size_t>(pm.dim) * pm.dim;
  if (pm.fill != Fill::periodic && ev.slots() != dd)
    throw std::invalid_argument("column softmax needs a periodic layout");
  PackedMatrix out = pm;
  out.ct = kernel.run(ev, pm.ct, pm.dim, report);
  return out;
}

} // namespace fhellm
