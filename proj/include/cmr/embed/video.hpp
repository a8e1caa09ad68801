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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmr/core/types.hpp"
#include "cmr/embed/layers.hpp"
#include "cmr/error.hpp"

namespace cmr::embed {

/// Row-major RGB image with channel values in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0.0) {}

  double* px(int x, int y) { return data.data() + (static_cast<size_t>(y) * width + x) * 3; }
  const double* px(int x, int y) const { return data.data() + (static_cast<size_t>(y) * width + x) * 3; }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

inline constexpr int kFocusStroke = 2;

/// Draws a red 2-pixel outline just inside `box`. A missing box leaves the
/// image unchanged.
inline void draw_focus_box(RgbImage& img, const std::optional<BBox>& box) {
  if (!box) return;
  if (!box->inside({img.width, img.height})) fail(ErrorCode::kOutOfBounds, "focus box lies outside the frame");
  for (int y = box->y0; y < box->y1; ++y)
    for (int x = box->x0; x < box->x1; ++x) {
      const bool edge = x < box->x0 + kFocusStroke || x >= box->x1 - kFocusStroke || y < box->y0 + kFocusStroke ||
                        y >= box->y1 - kFocusStroke;
      if (!edge) continue;
      double* p = img.px(x, y);
      p[0] = 1.0;
      p[1] = 0.0;
      p[2] = 0.0;
    }
}

struct VideoConfig {
  int width = 40;
  int height = 30;
  int patch_cols = 8;
  int patch_rows = 6;
  bool focus_box = true;

  int feature_dim() const { return 3 * patch_rows * patch_cols; }
  void validate() const {
    if (width <= 0 || height <= 0 || patch_cols <= 0 || patch_rows <= 0 || patch_cols > width || patch_rows > height)
      fail(ErrorCode::kInvalidConfig, "video config needs positive dims with at most one patch per pixel");
  }
};

/// Fixed gray level per class name used when rendering masks into frames.
class ClassPalette {
 public:
  ClassPalette() = default;
  explicit ClassPalette(std::map<std::string, double> levels) : levels_(std::move(levels)) {}

  static ClassPalette defaults() {
    return ClassPalette({{"unlabeled", 0.0}, {"road", 0.2},    {"crosswalk", 0.9}, {"sidewalk", 0.55},
                         {"person", 0.35},   {"pavement", 0.7}, {"terrain", 0.45}, {"car", 0.8},
                         {"bus", 0.6},       {"truck", 0.3},    {"building", 0.5}});
  }

  double level(const std::string& name) const {
    auto it = levels_.find(name);
    if (it != levels_.end()) return it->second;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) h = (h ^ c) * 1099511628211ULL;
    return 0.1 + 0.8 * static_cast<double>(h % 1000) / 999.0;
  }

 private:
  std::map<std::string, double> levels_;
};

inline BBox scale_box(const BBox& b, ImageDims from, ImageDims to) {
  const double sx = static_cast<double>(to.width) / from.width;
  const double sy = static_cast<double>(to.height) / from.height;
  BBox s{static_cast<int>(std::floor(b.x0 * sx)), static_cast<int>(std::floor(b.y0 * sy)),
         static_cast<int>(std::ceil(b.x1 * sx)), static_cast<int>(std::ceil(b.y1 * sy))};
  s = s.clipped(to);
  s.x1 = std::max(s.x1, s.x0 + 1);
  s.y1 = std::max(s.y1, s.y0 + 1);
  return s;
}

/// Gray rendering of the segmentation pair at reduced resolution (object
/// classes over ground classes), sampled at pixel centres.
inline RgbImage render_masks(const SegmentationMaskPair& masks, const VideoConfig& cfg, const ClassPalette& palette) {
  RgbImage img(cfg.width, cfg.height);
  const ImageDims full = masks.dims();
  const ClassId obj_void = masks.object_classes->id("unlabeled").value_or(ClassId{0xffff});
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      const int fx = std::min(full.width - 1, static_cast<int>((x + 0.5) * full.width / cfg.width));
      const int fy = std::min(full.height - 1, static_cast<int>((y + 0.5) * full.height / cfg.height));
      const ClassId o = masks.object_mask.at(fx, fy);
      const double g = o != obj_void ? palette.level(masks.object_classes->name(o))
                                     : palette.level(masks.ground_classes->name(masks.ground_mask.at(fx, fy)));
      double* p = img.px(x, y);
      p[0] = p[1] = p[2] = g;
    }
  return img;
}

/// Frame stack for one person: the static scene rendering, with the focus
/// box drawn per frame when enabled.
inline std::vector<RgbImage> render_clip(const SceneSample& s, const VideoConfig& cfg, const ClassPalette& palette) {
  cfg.validate();
  RgbImage base(cfg.width, cfg.height);
  if (s.masks) base = render_masks(*s.masks, cfg, palette);
  std::vector<RgbImage> frames;
  frames.reserve(kSequenceLength);
  for (int t = 0; t < kSequenceLength; ++t) {
    RgbImage f = base;
    if (cfg.focus_box && t < static_cast<int>(s.motion.boxes.size()))
      draw_focus_box(f, scale_box(s.motion.boxes[t], s.image_dims, {cfg.width, cfg.height}));
    frames.push_back(std::move(f));
  }
  return frames;
}

/// Patch-mean grid per frame, averaged over time. Layout: channel-major,
/// then patch row, then patch column.
inline Vec video_features(const std::vector<RgbImage>& frames, const VideoConfig& cfg) {
  if (frames.empty()) fail(ErrorCode::kShapeMismatch, "video clip has no frames");
  Vec f = Vec::Zero(cfg.feature_dim());
  std::vector<double> counts(static_cast<size_t>(cfg.patch_rows * cfg.patch_cols), 0.0);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) counts[(y * cfg.patch_rows / cfg.height) * cfg.patch_cols + x * cfg.patch_cols / cfg.width] += 1;
  const int cells = cfg.patch_rows * cfg.patch_cols;
  for (const auto& img : frames) {
    if (img.width != cfg.width || img.height != cfg.height) fail(ErrorCode::kShapeMismatch, "frame size differs from video config");
    for (int y = 0; y < cfg.height; ++y)
      for (int x = 0; x < cfg.width; ++x) {
        const int cell = (y * cfg.patch_rows / cfg.height) * cfg.patch_cols + x * cfg.patch_cols / cfg.width;
        const double* p = img.px(x, y);
        for (int c = 0; c < 3; ++c) f[c * cells + cell] += p[c];
      }
  }
  for (int c = 0; c < 3; ++c)
    for (int cell = 0; cell < cells; ++cell) f[c * cells + cell] /= counts[cell] * static_cast<double>(frames.size());
  return f;
}

/// Gradient of a loss w.r.t. every pixel given its gradient w.r.t. the features.
inline std::vector<RgbImage> video_features_backward(const Vec& dfeat, int num_frames, const VideoConfig& cfg) {
  const int cells = cfg.patch_rows * cfg.patch_cols;
  std::vector<double> counts(static_cast<size_t>(cells), 0.0);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) counts[(y * cfg.patch_rows / cfg.height) * cfg.patch_cols + x * cfg.patch_cols / cfg.width] += 1;
  RgbImage g(cfg.width, cfg.height);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      const int cell = (y * cfg.patch_rows / cfg.height) * cfg.patch_cols + x * cfg.patch_cols / cfg.width;
      double* p = g.px(x, y);
      for (int c = 0; c < 3; ++c) p[c] = dfeat[c * cells + cell] / (counts[cell] * num_frames);
    }
  return std::vector<RgbImage>(static_cast<size_t>(num_frames), g);
}

}  // namespace cmr::embed
