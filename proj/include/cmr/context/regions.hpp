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

#include <cmath>
#include <map>
#include <utility>

#include "cmr/core/types.hpp"
#include "cmr/error.hpp"

namespace cmr::context {

/// Region geometry relative to the person box. Horizontal fractions scale
/// with box width, vertical ones with box height.
struct RegionConfig {
  double lateral_in = 0.05;
  double lateral_out = 0.05;
  double lateral_v_lo = 0.25;
  double lateral_v_hi = 0.75;
  double behind_depth = 0.10;
  double ground_depth = 0.05;
  double min_class_frac = 0.02;
  int min_class_px = 10;

  void validate() const {
    for (double f : {lateral_in, lateral_out, lateral_v_lo, lateral_v_hi, behind_depth, ground_depth, min_class_frac})
      if (!(f > 0.0 && f < 1.0)) fail(ErrorCode::kInvalidConfig, "region fractions must lie in (0, 1)");
    if (lateral_v_lo >= lateral_v_hi) fail(ErrorCode::kInvalidConfig, "lateral_v_lo must be below lateral_v_hi");
    if (min_class_px <= 0) fail(ErrorCode::kInvalidConfig, "min_class_px must be positive");
  }
};

/// Half-open pixel rectangle; may be empty after clipping.
struct Region {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool empty() const { return x1 <= x0 || y1 <= y0; }
  long long area() const { return empty() ? 0 : static_cast<long long>(x1 - x0) * (y1 - y0); }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  Region clipped(ImageDims d) const {
    return {std::max(x0, 0), std::max(y0, 0), std::min(x1, d.width), std::min(y1, d.height)};
  }
  friend bool operator==(const Region&, const Region&) = default;
};

namespace detail {
// Fraction-scaled coordinates that land within 1e-9 of an integer snap to it.
inline int floor_px(double v) { return static_cast<int>(std::floor(v + 1e-9)); }
inline int ceil_px(double v) { return static_cast<int>(std::ceil(v - 1e-9)); }
}  // namespace detail

/// Lateral strips straddling the left and right box edges, over the middle
/// band of the box height. Starts round down, ends round up.
inline std::pair<Region, Region> side_strips(const BBox& box, ImageDims dims, const RegionConfig& cfg) {
  using detail::ceil_px;
  using detail::floor_px;
  const double w = box.width();
  const double h = box.height();
  const int y0 = floor_px(box.y0 + cfg.lateral_v_lo * h);
  const int y1 = ceil_px(box.y0 + cfg.lateral_v_hi * h);
  Region left{floor_px(box.x0 - cfg.lateral_out * w), y0, ceil_px(box.x0 + cfg.lateral_in * w), y1};
  Region right{floor_px(box.x1 - cfg.lateral_in * w), y0, ceil_px(box.x1 + cfg.lateral_out * w), y1};
  return {left.clipped(dims), right.clipped(dims)};
}

/// Band directly below the box, as wide as the box.
inline Region behind_band(const BBox& box, ImageDims dims, const RegionConfig& cfg) {
  return Region{box.x0, box.y1, box.x1, detail::ceil_px(box.y1 + cfg.behind_depth * box.height())}.clipped(dims);
}

/// Bottom slice of the box where the feet touch the ground.
inline Region ground_band(const BBox& box, ImageDims dims, const RegionConfig& cfg) {
  return Region{box.x0, detail::floor_px(box.y1 - cfg.ground_depth * box.height()), box.x1, box.y1}.clipped(dims);
}

inline Region box_region(const BBox& box, ImageDims dims) { return Region{box.x0, box.y0, box.x1, box.y1}.clipped(dims); }

inline std::map<ClassId, long long> class_counts(const ClassRaster& raster, const Region& r) {
  std::map<ClassId, long long> counts;
  if (r.empty()) return counts;
  for (int y = r.y0; y < r.y1; ++y) {
    const ClassId* row = raster.data.data() + static_cast<size_t>(y) * raster.width;
    for (int x = r.x0; x < r.x1; ++x) ++counts[row[x]];
  }
  return counts;
}

/// A class is present in a region when it covers at least `min_class_px`
/// pixels and at least `min_class_frac` of the region.
inline bool passes_threshold(long long count, long long area, const RegionConfig& cfg) {
  return area > 0 && count >= cfg.min_class_px && static_cast<double>(count) >= cfg.min_class_frac * static_cast<double>(area);
}

}  // namespace cmr::context
