// Copyright 2026 The CMR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "cmr/error.hpp"

namespace cmr::motion {

struct LowessConfig {
  double frac = 0.5;
  int robust_iters = 2;

  void validate() const {
    if (!(frac > 0.0 && frac <= 1.0)) fail(ErrorCode::kInvalidConfig, "lowess frac must lie in (0, 1]");
    if (robust_iters < 0) fail(ErrorCode::kInvalidConfig, "lowess robust_iters must be >= 0");
  }
};

struct LowessResult {
  std::vector<double> values;
  /// Indices whose local window carried no weight; their input value was kept.
  std::vector<size_t> degenerate;
};

namespace detail {

inline double tricube(double u) {
  u = std::abs(u);
  if (u >= 1.0) return 0.0;
  const double t = 1.0 - u * u * u;
  return t * t * t;
}

inline double bisquare(double u) {
  u = std::abs(u);
  if (u >= 1.0) return 0.0;
  const double t = 1.0 - u * u;
  return t * t;
}

inline double median(std::vector<double> v) {
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = (m + *std::max_element(v.begin(), v.begin() + mid)) / 2;
  return m;
}

}  // namespace detail

/// Robust locally weighted linear regression over an equally spaced series
/// (x = 0, 1, ..., n-1).
///
/// Each point is fit with a tri-cube weighted line over its ceil(frac * n)
/// nearest neighbours; the neighbour at the window radius gets zero weight.
/// After the initial pass, `robust_iters` rounds reweight every point by the
/// bisquare of its residual over six median absolute residuals.
inline LowessResult lowess_smooth(std::span<const double> series, const LowessConfig& cfg) {
  cfg.validate();
  const size_t n = series.size();
  if (n < 2) fail(ErrorCode::kEmptyInput, "lowess requires at least two points");
  const size_t r = std::clamp<size_t>(static_cast<size_t>(std::ceil(cfg.frac * static_cast<double>(n) - 1e-10)), 2, n);

  std::vector<double> robust(n, 1.0);
  LowessResult out;
  out.values.assign(n, 0.0);
  double scale = 0.0;
  for (double y : series) scale = std::max(scale, std::abs(y));

  for (int iter = 0; iter <= cfg.robust_iters; ++iter) {
    out.degenerate.clear();
    size_t lo = 0;
    for (size_t i = 0; i < n; ++i) {
      // Slide the r-wide window right while that brings it closer to i.
      while (lo + r < n && (i - lo) > (lo + r - i)) ++lo;
      const double radius = static_cast<double>(std::max(i - lo, lo + r - 1 - i));
      double sw = 0, sx = 0, sy = 0;
      for (size_t j = lo; j < lo + r; ++j) {
        const double dx = static_cast<double>(j) - static_cast<double>(i);
        const double w = detail::tricube(dx / radius) * robust[j];
        sw += w;
        sx += w * static_cast<double>(j);
        sy += w * series[j];
      }
      if (sw <= 0.0) {
        out.values[i] = series[i];
        out.degenerate.push_back(i);
        continue;
      }
      const double mx = sx / sw;
      const double my = sy / sw;
      double sxx = 0, sxy = 0;
      for (size_t j = lo; j < lo + r; ++j) {
        const double dx = static_cast<double>(j) - static_cast<double>(i);
        const double w = detail::tricube(dx / radius) * robust[j];
        const double cx = static_cast<double>(j) - mx;
        sxx += w * cx * cx;
        sxy += w * cx * (series[j] - my);
      }
      double fit = my;
      if (sxx > 1e-12 * sw * radius * radius) fit += sxy / sxx * (static_cast<double>(i) - mx);
      out.values[i] = fit;
    }
    if (iter == cfg.robust_iters) break;

    std::vector<double> abs_res(n);
    for (size_t i = 0; i < n; ++i) abs_res[i] = std::abs(series[i] - out.values[i]);
    const double s = detail::median(abs_res);
    if (s <= 1e-12 * (1.0 + scale)) break;
    for (size_t i = 0; i < n; ++i) robust[i] = detail::bisquare(abs_res[i] / (6.0 * s));
  }
  return out;
}

}  // namespace cmr::motion
