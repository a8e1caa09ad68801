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
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cmr/annotate/composer.hpp"
#include "cmr/context/labeler.hpp"
#include "cmr/core/types.hpp"
#include "cmr/error.hpp"
#include "cmr/motion/families.hpp"

namespace cmr::synthetic {

inline std::vector<std::string> default_object_class_names() {
  return {"unlabeled", "person",   "car",      "bus",   "truck", "police car", "fire truck", "ambulance",
          "bicycle",   "e-scooter", "building", "pole", "tree",  "bench",      "traffic light", "pavement",
          "terrain"};
}

inline std::vector<std::string> default_ground_class_names() {
  return {"unlabeled", "road", "crosswalk", "sidewalk", "driveway", "parking", "bike lane", "curb"};
}

/// A rectangle painted with one class, in painting order.
struct RegionPaint {
  std::string class_name;
  BBox rect;
};

struct PersonPlacement {
  BBox box;
  motion::MotionFamily family = motion::MotionFamily::kStand;
};

/// Declarative scene description. `persons[0]` is the subject of the sample;
/// `declared` lists the context relations the layout is built to produce for it.
struct SceneRecipe {
  ImageDims dims{400, 300};
  std::vector<PersonPlacement> persons;
  std::vector<RegionPaint> ground;
  std::vector<RegionPaint> objects;
  std::vector<ContextLabel> declared;
};

struct SyntheticScene {
  SceneSample sample;
  AnnotationSet ground_truth;
};

/// Person pixels cover the central 40% of the box width, leaving the box
/// edges to the background as a real silhouette would.
inline BBox person_silhouette(const BBox& box) {
  const int inset = static_cast<int>(box.width() * 0.3);
  return {box.x0 + inset, box.y0, std::max(box.x1 - inset, box.x0 + inset + 1), box.y1};
}

inline void paint(ClassRaster& r, const BBox& rect, ClassId id) {
  for (int y = rect.y0; y < rect.y1; ++y)
    for (int x = rect.x0; x < rect.x1; ++x) r.at(x, y) = id;
}

struct ClassTables {
  std::shared_ptr<const ClassTable> object;
  std::shared_ptr<const ClassTable> ground;

  static ClassTables defaults() {
    return {std::make_shared<const ClassTable>(ClassTable::from_names(default_object_class_names())),
            std::make_shared<const ClassTable>(ClassTable::from_names(default_ground_class_names()))};
  }
};

/// Renders a recipe into a scene sample: masks for the middle frame, a
/// parametric motion for the subject, and the declared ground truth.
inline SyntheticScene generate_synthetic_scene(const SceneRecipe& recipe, std::uint64_t seed, const std::string& id,
                                               const ClassTables& tables = ClassTables::defaults(),
                                               const annotate::SynonymTable& synonyms = annotate::SynonymTable::defaults()) {
  if (recipe.persons.empty()) fail(ErrorCode::kInvalidRecipe, "recipe needs at least one person");
  if (recipe.dims.width <= 0 || recipe.dims.height <= 0) fail(ErrorCode::kInvalidRecipe, "image dims must be positive");
  auto check = [&](const BBox& b, const std::string& what) {
    if (!b.inside(recipe.dims)) fail(ErrorCode::kInvalidRecipe, what + " lies outside the image");
  };
  for (const auto& p : recipe.persons) check(p.box, "person box");
  for (const auto& g : recipe.ground) check(g.rect, "ground region '" + g.class_name + "'");
  for (const auto& o : recipe.objects) check(o.rect, "object region '" + o.class_name + "'");

  std::mt19937_64 rng(seed);
  SegmentationMaskPair masks;
  masks.object_classes = tables.object;
  masks.ground_classes = tables.ground;
  masks.object_mask = ClassRaster(recipe.dims.width, recipe.dims.height, tables.object->require("unlabeled"));
  masks.ground_mask = ClassRaster(recipe.dims.width, recipe.dims.height, tables.ground->require("unlabeled"));
  try {
    for (const auto& g : recipe.ground) paint(masks.ground_mask, g.rect, tables.ground->require(g.class_name));
    for (const auto& o : recipe.objects) paint(masks.object_mask, o.rect, tables.object->require(o.class_name));
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidRecipe, e.what());
  }
  const ClassId person_id = tables.object->require("person");
  for (const auto& p : recipe.persons) paint(masks.object_mask, person_silhouette(p.box), person_id);

  const PersonPlacement& subject = recipe.persons.front();
  const auto params = motion::sample_params(subject.family, rng);
  SyntheticScene out;
  SceneSample& s = out.sample;
  s.id = id;
  s.image_dims = recipe.dims;
  s.motion = motion::generate_family_motion(subject.family, params, rng);
  s.motion.track_id = id;
  s.motion.boxes.assign(kSequenceLength, subject.box);
  for (int t = 0; t < kSequenceLength; ++t) s.frame_refs.push_back("synthetic://" + id + "/frame_" + std::to_string(t));
  s.masks = std::move(masks);

  std::vector<ContextLabel> contexts = recipe.declared;
  std::sort(contexts.begin(), contexts.end());
  out.ground_truth = annotate::compose_annotations({motion::family_gerund(subject.family)}, contexts, synonyms);
  s.ground_truth = out.ground_truth;
  return out;
}

struct RandomSceneOptions {
  ImageDims dims{400, 300};
  std::vector<std::string> ground_classes = {"road", "crosswalk", "sidewalk"};
  std::vector<std::string> fallback_classes = {"pavement", "terrain"};
  std::vector<std::string> object_classes = {"car",   "bus",  "truck", "police car", "fire truck", "ambulance",
                                             "bicycle", "e-scooter", "building", "pole", "tree", "bench"};
  std::vector<motion::MotionFamily> families = {motion::kAllFamilies.begin(), motion::kAllFamilies.end()};
  bool with_objects = true;
  double fallback_prob = 0.15;
  double edge_prob = 0.15;
  /// Paint the base surface with the underfoot class instead of a random one.
  bool uniform_ground = false;
  /// Forced subject family / ground class (for balanced datasets).
  std::optional<motion::MotionFamily> family;
  std::optional<std::string> ground;
};

namespace detail {
inline int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool bernoulli(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }
template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(v.size()) - 1))];
}
inline int ceil_frac(double f, int len) { return static_cast<int>(std::ceil(f * len - 1e-9)); }
}  // namespace detail

/// Random single-person layout whose declared relations follow from the
/// geometry: lateral objects sit fully outside the box edge at mid height,
/// behind objects start at the box bottom, the underfoot class covers the
/// whole foot band, and distractors stay clear of every labeled region.
inline SceneRecipe random_recipe(std::mt19937_64& rng, const RandomSceneOptions& opt,
                                 const context::RegionConfig& rc = {}) {
  using detail::bernoulli;
  using detail::pick;
  using detail::uniform_int;
  const int W = opt.dims.width, H = opt.dims.height;
  SceneRecipe r;
  r.dims = opt.dims;

  const int w = uniform_int(rng, 35, 80);
  const int h = uniform_int(rng, 90, std::min(180, H - 40));
  const int k = detail::ceil_frac(rc.lateral_out, w);
  const int band = detail::ceil_frac(rc.behind_depth, h);
  const bool at_left_edge = bernoulli(rng, opt.edge_prob / 2);
  const bool at_bottom_edge = bernoulli(rng, opt.edge_prob / 2);
  const int margin = 30;
  const int x0 = at_left_edge ? 0 : uniform_int(rng, margin, W - w - margin);
  const int y0 = at_bottom_edge ? H - h : uniform_int(rng, 10, H - h - band - 12);
  const BBox box{x0, y0, x0 + w, y0 + h};
  const auto family = opt.family ? *opt.family : pick(rng, opt.families);
  r.persons.push_back({box, family});

  // Ground: a base surface from the horizon down, then the underfoot class.
  const int horizon = std::max(0, y0 + h / 3);
  const std::string base = pick(rng, opt.ground_classes);
  const BBox underfoot{std::max(0, x0 - uniform_int(rng, 0, 25)), std::max(horizon, y0 + h - (3 * h) / 10),
                       std::min(W, x0 + w + uniform_int(rng, 0, 25)), H};
  const bool fallback = !opt.ground && bernoulli(rng, opt.fallback_prob);
  const std::string g = opt.ground ? *opt.ground : pick(rng, opt.ground_classes);
  r.ground.push_back({opt.uniform_ground && !fallback ? g : base, {0, horizon, W, H}});
  if (fallback) {
    const std::string f = pick(rng, opt.fallback_classes);
    r.ground.push_back({"unlabeled", underfoot});
    r.objects.push_back({f, underfoot});
    r.declared.push_back({Relation::kOn, f});
  } else {
    r.ground.push_back({g, underfoot});
    r.declared.push_back({Relation::kOn, g});
  }
  if (!opt.with_objects) return r;

  std::vector<std::string> pool = opt.object_classes;
  std::shuffle(pool.begin(), pool.end(), rng);
  size_t next_class = 0;
  auto take_class = [&]() -> const std::string& { return pool[next_class++ % pool.size()]; };

  const int ya = y0 + detail::ceil_frac(0.30, h);
  const int yb = y0 + static_cast<int>(std::floor(0.70 * h));
  auto left_obj = [&](const std::string& c) {
    const int ow = uniform_int(rng, k + 1, std::min(25, x0));
    r.objects.push_back({c, {x0 - ow, ya, x0, yb}});
  };
  auto right_obj = [&](const std::string& c) {
    const int ow = uniform_int(rng, k + 1, std::min(25, W - box.x1));
    r.objects.push_back({c, {box.x1, ya, box.x1 + ow, yb}});
  };

  const int lateral = uniform_int(rng, 0, 4);
  const bool left_ok = x0 >= k + 1;
  switch (lateral) {
    case 1:
      if (left_ok) {
        const auto& c = take_class();
        left_obj(c);
        r.declared.push_back({Relation::kNextTo, c});
      }
      break;
    case 2: {
      const auto& c = take_class();
      right_obj(c);
      r.declared.push_back({Relation::kNextTo, c});
      break;
    }
    case 3:
      if (left_ok) {
        const auto& c = take_class();
        const int ol = uniform_int(rng, k + 1, std::min(25, x0));
        const int orr = uniform_int(rng, k + 1, std::min(25, W - box.x1));
        r.objects.push_back({c, {x0 - ol, ya, box.x1 + orr, yb}});
        r.declared.push_back({Relation::kInFrontOf, c});
      }
      break;
    case 4:
      if (left_ok) {
        const auto& a = take_class();
        const auto& b = take_class();
        left_obj(a);
        right_obj(b);
        r.declared.push_back({Relation::kNextTo, a});
        r.declared.push_back({Relation::kNextTo, b});
      }
      break;
    default: break;
  }

  if (box.y1 + band <= H && bernoulli(rng, 0.4)) {
    const auto& c = take_class();
    const int oh = uniform_int(rng, std::min(3, H - box.y1), std::min(40, H - box.y1));
    const int ext_l = uniform_int(rng, 0, std::min(20, x0));
    const int ext_r = uniform_int(rng, 0, std::min(20, W - box.x1));
    r.objects.push_back({c, {x0 - ext_l, box.y1, box.x1 + ext_r, box.y1 + oh}});
    r.declared.push_back({Relation::kBehind, c});
  }

  // Distractors: entirely left or right of the lateral strips.
  const int n_distract = uniform_int(rng, 0, 2);
  for (int i = 0; i < n_distract; ++i) {
    const auto& c = take_class();
    const int left_space = x0 - k - 1;
    const int right_start = box.x1 + k + 1;
    const bool go_left = left_space >= 10 && (right_start > W - 10 || bernoulli(rng, 0.5));
    int dx0, dx1;
    if (go_left) {
      dx1 = uniform_int(rng, 5, left_space);
      dx0 = uniform_int(rng, 0, dx1 - 1);
    } else if (right_start <= W - 10) {
      dx0 = uniform_int(rng, right_start, W - 5);
      dx1 = uniform_int(rng, dx0 + 1, W);
    } else {
      continue;
    }
    const int dy0 = uniform_int(rng, 0, H - 2);
    const int dy1 = uniform_int(rng, dy0 + 1, H);
    r.objects.push_back({c, {dx0, dy0, dx1, dy1}});
  }
  return r;
}

/// Two people side by side, each standing on its own ground class. The
/// subject is placed on a random side; only its ground relation is declared.
inline SceneRecipe random_two_person_recipe(std::mt19937_64& rng, const RandomSceneOptions& opt) {
  using detail::pick;
  using detail::uniform_int;
  const int W = opt.dims.width, H = opt.dims.height;
  SceneRecipe r;
  r.dims = opt.dims;
  const int half = W / 2;
  const int w = uniform_int(rng, 35, 60);
  const int h = uniform_int(rng, 90, std::min(160, H - 40));
  const int y0 = uniform_int(rng, 10, H - h - 10);
  const BBox left{uniform_int(rng, 20, half - w - 20), y0, 0, y0 + h};
  const BBox right{uniform_int(rng, half + 20, W - w - 20), y0, 0, y0 + h};
  const BBox lbox{left.x0, left.y0, left.x0 + w, left.y1};
  const BBox rbox{right.x0, right.y0, right.x0 + w, right.y1};
  const bool subject_left = detail::bernoulli(rng, 0.5);
  const auto subject_family = opt.family ? *opt.family : pick(rng, opt.families);
  const auto other_family = pick(rng, opt.families);
  const std::string subject_ground = opt.ground ? *opt.ground : pick(rng, opt.ground_classes);
  const std::string other_ground = pick(rng, opt.ground_classes);
  const int horizon = std::max(0, y0 + h / 3);
  r.ground.push_back({subject_left ? subject_ground : other_ground, {0, horizon, half, H}});
  r.ground.push_back({subject_left ? other_ground : subject_ground, {half, horizon, W, H}});
  r.persons.push_back({subject_left ? lbox : rbox, subject_family});
  r.persons.push_back({subject_left ? rbox : lbox, other_family});
  r.declared.push_back({Relation::kOn, subject_ground});
  return r;
}

}  // namespace cmr::synthetic
