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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmr/context/regions.hpp"
#include "cmr/core/types.hpp"
#include "cmr/error.hpp"

namespace cmr::context {

struct GroundVocabulary {
  std::set<std::string> classes = {"road",  "crosswalk", "sidewalk",  "driveway", "pavement",
                                   "terrain", "parking", "bike lane", "curb",     "grass"};

  bool contains(const std::string& name) const { return classes.count(name) != 0; }
  void validate() const {
    if (classes.empty()) fail(ErrorCode::kInvalidConfig, "ground vocabulary must not be empty");
  }
};

struct ContextConfig {
  RegionConfig regions;
  GroundVocabulary ground;
  /// Never reported by any relation (the person itself, void labels).
  std::set<std::string> ignored = {"unlabeled", "void", "person"};
  /// Additional object classes not considered relevant for lateral/behind.
  std::set<std::string> excluded_objects;

  bool is_relevant_object(const std::string& name) const {
    return !ignored.count(name) && !ground.contains(name) && !excluded_objects.count(name);
  }
  void validate() const {
    regions.validate();
    ground.validate();
  }
};

namespace detail {

inline std::set<std::string> present_objects(const ClassRaster& mask, const ClassTable& classes, const Region& region,
                                             const ContextConfig& cfg) {
  std::set<std::string> out;
  const long long area = region.area();
  for (const auto& [id, count] : class_counts(mask, region)) {
    const std::string& name = classes.name(id);
    if (cfg.is_relevant_object(name) && passes_threshold(count, area, cfg.regions)) out.insert(name);
  }
  return out;
}

}  // namespace detail

/// next_to for classes in exactly one side strip, in_front_of for classes in
/// both (in_front_of takes precedence).
inline std::vector<ContextLabel> label_lateral(const BBox& box, const ClassRaster& object_mask,
                                               const ClassTable& object_classes, const ContextConfig& cfg) {
  const auto [left, right] = side_strips(box, object_mask.dims(), cfg.regions);
  const auto in_left = detail::present_objects(object_mask, object_classes, left, cfg);
  const auto in_right = detail::present_objects(object_mask, object_classes, right, cfg);
  std::vector<ContextLabel> out;
  std::set<std::string> all = in_left;
  all.insert(in_right.begin(), in_right.end());
  for (const auto& name : all) {
    const bool both = in_left.count(name) && in_right.count(name);
    out.push_back({both ? Relation::kInFrontOf : Relation::kNextTo, name});
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<ContextLabel> label_behind(const BBox& box, const ClassRaster& object_mask,
                                              const ClassTable& object_classes, const ContextConfig& cfg) {
  const Region band = behind_band(box, object_mask.dims(), cfg.regions);
  std::vector<ContextLabel> out;
  for (const auto& name : detail::present_objects(object_mask, object_classes, band, cfg))
    out.push_back({Relation::kBehind, name});
  return out;
}

namespace detail {

/// Majority class among `eligible` ids in the band; ties go to the larger
/// count over the whole person box, then to the lexicographically smaller name.
template <typename Eligible>
std::optional<std::string> majority_class(const ClassRaster& mask, const ClassTable& classes, const Region& band,
                                          const Region& full, const RegionConfig& rc, Eligible eligible) {
  const auto counts = class_counts(mask, band);
  std::optional<std::map<ClassId, long long>> full_counts;
  std::optional<std::string> best;
  long long best_count = -1, best_full = -1;
  for (const auto& [id, count] : counts) {
    const std::string& name = classes.name(id);
    if (!eligible(name) || !passes_threshold(count, band.area(), rc)) continue;
    if (count < best_count) continue;
    if (!full_counts) full_counts = class_counts(mask, full);
    const long long fc = full_counts->count(id) ? full_counts->at(id) : 0;
    const bool better = count > best_count || fc > best_full || (fc == best_full && name < *best);
    if (better) {
      best = name;
      best_count = count;
      best_full = fc;
    }
  }
  return best;
}

}  // namespace detail

/// Single ground-level label from the bottom slice of the box. The ground
/// segmentation decides when one of its ground classes is present; the
/// object segmentation is the fallback.
inline std::optional<ContextLabel> try_label_ground(const BBox& box, const SegmentationMaskPair& masks,
                                                    const ContextConfig& cfg) {
  const ImageDims dims = masks.dims();
  const Region band = ground_band(box, dims, cfg.regions);
  const Region full = box_region(box, dims);
  if (auto g = detail::majority_class(masks.ground_mask, *masks.ground_classes, band, full, cfg.regions,
                                      [&](const std::string& n) { return cfg.ground.contains(n) && !cfg.ignored.count(n); }))
    return ContextLabel{Relation::kOn, *g};
  if (auto o = detail::majority_class(masks.object_mask, *masks.object_classes, band, full, cfg.regions,
                                      [&](const std::string& n) { return !cfg.ignored.count(n); }))
    return ContextLabel{Relation::kOn, *o};
  return std::nullopt;
}

inline ContextLabel label_ground(const BBox& box, const SegmentationMaskPair& masks, const ContextConfig& cfg) {
  auto label = try_label_ground(box, masks, cfg);
  if (!label) fail(ErrorCode::kNoGroundClass, "no ground class under the person box");
  return *label;
}

/// All context labels for one person, canonically ordered
/// (on, behind, in_front_of, next_to; class names ascending).
inline std::vector<ContextLabel> label_context(const BBox& box, const SegmentationMaskPair& masks,
                                               const ContextConfig& cfg) {
  cfg.validate();
  if (masks.object_mask.dims() != masks.ground_mask.dims())
    fail(ErrorCode::kShapeMismatch, "object and ground masks differ in size");
  std::vector<ContextLabel> out;
  if (auto on = try_label_ground(box, masks, cfg)) out.push_back(*on);
  auto behind = label_behind(box, masks.object_mask, *masks.object_classes, cfg);
  auto lateral = label_lateral(box, masks.object_mask, *masks.object_classes, cfg);
  out.insert(out.end(), behind.begin(), behind.end());
  out.insert(out.end(), lateral.begin(), lateral.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cmr::context
