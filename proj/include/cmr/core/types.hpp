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
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cmr/error.hpp"

namespace cmr {

inline constexpr int kSequenceLength = 20;
inline constexpr int kFrameRateHz = 10;
/// SMPL body joints, root (pelvis) first. See docs in README for the table.
inline constexpr int kNumJoints = 24;
inline constexpr int kMiddleFrame = kSequenceLength / 2;

struct ImageDims {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Pixel box, inclusive-exclusive: covers x0 <= x < x1, y0 <= y < y1.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool valid() const { return x0 >= 0 && y0 >= 0 && x1 > x0 && y1 > y0; }
  bool inside(ImageDims dims) const { return valid() && x1 <= dims.width && y1 <= dims.height; }

  BBox translated(int dx, int dy) const { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }
  BBox clipped(ImageDims dims) const {
    return {std::max(x0, 0), std::max(y0, 0), std::min(x1, dims.width), std::min(y1, dims.height)};
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Unit quaternion (w, x, y, z).
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Quat operator-() const { return {-w, -x, -y, -z}; }
  Quat normalized() const {
    const double n = norm();
    if (n == 0) fail(ErrorCode::kZeroVector, "cannot normalize zero quaternion");
    return {w / n, x / n, y / n, z / n};
  }
  std::array<double, 4> components() const { return {w, x, y, z}; }

  static Quat from_axis_angle(const Vec3& axis, double angle) {
    const double n = std::sqrt(axis.x * axis.x + axis.y * axis.y + axis.z * axis.z);
    const double s = std::sin(angle / 2) / n;
    return {std::cos(angle / 2), axis.x * s, axis.y * s, axis.z * s};
  }
  /// Rotation angle between two orientations, in radians.
  static double angle_between(const Quat& a, const Quat& b) {
    const double d = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
    return 2 * std::acos(d);
  }

  friend bool operator==(const Quat&, const Quat&) = default;
};

using Pose = std::array<Vec3, kNumJoints>;

/// One detection frame of a multi-person video.
struct Frame {
  int frame_index = 0;
  ImageDims image_dims;
  std::map<std::string, BBox> person_boxes;  // absent track id = missing detection
};

/// Per-frame observation of a single tracked person. Missing detections have
/// neither box nor pose.
struct TrackFrame {
  int frame_index = 0;
  std::optional<BBox> box;
  std::optional<Pose> pose;
  std::optional<Quat> root_orientation;

  bool present() const { return box.has_value() && pose.has_value() && root_orientation.has_value(); }
};

struct MotionSequence {
  std::string track_id;
  int frame_rate_hz = kFrameRateHz;
  std::vector<Pose> frames;        // kSequenceLength entries
  std::vector<Quat> root_orientation;
  std::vector<BBox> boxes;

  void validate() const {
    if (frames.size() != kSequenceLength || root_orientation.size() != kSequenceLength ||
        boxes.size() != kSequenceLength)
      fail(ErrorCode::kShapeMismatch, "motion sequence for '" + track_id + "' must have exactly " +
                                          std::to_string(kSequenceLength) + " frames");
    for (const auto& q : root_orientation)
      if (std::abs(q.norm() - 1.0) > 1e-6)
        fail(ErrorCode::kShapeMismatch, "root orientation quaternion is not unit-norm");
  }
};

template <typename T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  ImageDims dims() const { return {width, height}; }
  T& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  const T& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  friend bool operator==(const Raster&, const Raster&) = default;
};

using ClassId = std::uint16_t;
using ClassRaster = Raster<ClassId>;

/// id -> class name lookup for one segmentation vocabulary.
class ClassTable {
 public:
  ClassTable() = default;
  explicit ClassTable(std::map<ClassId, std::string> names) : names_(std::move(names)) {
    for (const auto& [id, name] : names_) ids_[name] = id;
  }

  /// Builds a table assigning ids 0..n-1 in order.
  static ClassTable from_names(const std::vector<std::string>& names) {
    std::map<ClassId, std::string> m;
    for (size_t i = 0; i < names.size(); ++i) m[static_cast<ClassId>(i)] = names[i];
    return ClassTable(std::move(m));
  }

  bool contains(ClassId id) const { return names_.count(id) != 0; }
  const std::string& name(ClassId id) const {
    auto it = names_.find(id);
    if (it == names_.end()) fail(ErrorCode::kNotFound, "class id " + std::to_string(id) + " not in table");
    return it->second;
  }
  std::optional<ClassId> id(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  ClassId require(const std::string& name) const {
    auto found = id(name);
    if (!found) fail(ErrorCode::kNotFound, "class '" + name + "' not in table");
    return *found;
  }
  const std::map<ClassId, std::string>& entries() const { return names_; }
  size_t size() const { return names_.size(); }

  friend bool operator==(const ClassTable& a, const ClassTable& b) { return a.names_ == b.names_; }

 private:
  std::map<ClassId, std::string> names_;
  std::map<std::string, ClassId> ids_;
};

struct SegmentationMaskPair {
  ClassRaster object_mask;
  ClassRaster ground_mask;
  std::shared_ptr<const ClassTable> object_classes;
  std::shared_ptr<const ClassTable> ground_classes;

  ImageDims dims() const { return object_mask.dims(); }

  void validate(ImageDims expected) const {
    if (object_mask.dims() != expected || ground_mask.dims() != expected)
      fail(ErrorCode::kShapeMismatch, "segmentation rasters must match image dimensions");
    if (!object_classes || !ground_classes) fail(ErrorCode::kInvalidConfig, "mask pair missing class tables");
    for (ClassId id : object_mask.data)
      if (!object_classes->contains(id)) fail(ErrorCode::kShapeMismatch, "object mask id " + std::to_string(id) + " unknown");
    for (ClassId id : ground_mask.data)
      if (!ground_classes->contains(id)) fail(ErrorCode::kShapeMismatch, "ground mask id " + std::to_string(id) + " unknown");
  }
};

enum class Relation { kOn, kBehind, kInFrontOf, kNextTo };

inline std::string relation_name(Relation r) {
  switch (r) {
    case Relation::kOn: return "on";
    case Relation::kBehind: return "behind";
    case Relation::kInFrontOf: return "in_front_of";
    case Relation::kNextTo: return "next_to";
  }
  return "on";
}

inline Relation parse_relation(const std::string& s) {
  if (s == "on") return Relation::kOn;
  if (s == "behind") return Relation::kBehind;
  if (s == "in_front_of") return Relation::kInFrontOf;
  if (s == "next_to") return Relation::kNextTo;
  fail(ErrorCode::kParseError, "unknown relation '" + s + "'");
}

struct ContextLabel {
  Relation relation = Relation::kOn;
  std::string class_name;

  /// Canonical output order: on, behind, in_front_of, next_to; then class name.
  friend auto operator<=>(const ContextLabel& a, const ContextLabel& b) {
    return std::tie(a.relation, a.class_name) <=> std::tie(b.relation, b.class_name);
  }
  friend bool operator==(const ContextLabel&, const ContextLabel&) = default;
};

struct AnnotationSet {
  std::vector<std::string> motions;  // gerund forms, rank order
  std::vector<ContextLabel> contexts;
  std::vector<std::string> simple;
  std::vector<std::string> sentences;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

struct SceneSample {
  std::string id;
  ImageDims image_dims;
  MotionSequence motion;
  std::vector<std::string> frame_refs;
  std::optional<SegmentationMaskPair> masks;  // middle frame
  AnnotationSet annotations;
  std::optional<AnnotationSet> ground_truth;
};

}  // namespace cmr
