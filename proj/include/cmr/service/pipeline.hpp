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

#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmr/annotate/composer.hpp"
#include "cmr/context/labeler.hpp"
#include "cmr/core/manifest.hpp"
#include "cmr/core/synthetic.hpp"
#include "cmr/embed/model.hpp"
#include "cmr/embed/train.hpp"
#include "cmr/error.hpp"
#include "cmr/index/vector_index.hpp"
#include "cmr/motion/labeling.hpp"
#include "cmr/motion/orientation.hpp"
#include "cmr/motion/segments.hpp"
#include "cmr/service/config.hpp"

namespace cmr::service {

/// Cuts a raw track into gap-filled 20-frame motion sequences.
inline std::vector<MotionSequence> sequences_from_track(std::span<const TrackFrame> frames, const std::string& track_id,
                                                        const motion::ValidityConfig& cfg) {
  const auto dense = motion::densify_track(frames);
  std::vector<MotionSequence> out;
  for (const auto& seg : motion::extract_valid_segments(dense, cfg)) {
    auto seq = motion::fill_gaps(dense, seg, track_id + ":" + std::to_string(dense[seg.begin].frame_index), cfg);
    out.push_back(std::move(seq));
  }
  return out;
}

/// Motion and context pipelines for one sample: smooths the root orientation,
/// labels motion from the spectral descriptor, labels context at the middle
/// frame, and composes the annotation strings.
class Annotator {
 public:
  explicit Annotator(const AppConfig& cfg)
      : cfg_(cfg), vocab_(cfg.motion_vocabulary()), synonyms_(cfg.synonym_table()) {}

  AnnotationSet annotate(SceneSample& s) const {
    s.motion.validate();
    s.motion = motion::smooth_root_orientation(s.motion, cfg_.lowess).sequence;
    std::vector<std::string> motions;
    for (const auto& word : motion::label_motion(descriptor_(s.motion), vocab_)) motions.push_back(vocab_.gerund(word));
    std::vector<ContextLabel> contexts;
    if (s.masks) contexts = context::label_context(s.motion.boxes[kMiddleFrame], *s.masks, cfg_.context);
    s.annotations = annotate::compose_annotations(std::move(motions), std::move(contexts), synonyms_);
    return s.annotations;
  }

 private:
  AppConfig cfg_;
  motion::MotionVocabulary vocab_;
  annotate::SynonymTable synonyms_;
  motion::SpectralMotionDescriptor descriptor_;
};

/// The training label of a sample: its first simple annotation.
inline std::string first_annotation(const AnnotationSet& a) {
  if (a.simple.empty()) fail(ErrorCode::kMissingLabel, "sample has no annotations");
  return a.simple.front();
}

/// Labels usable as hits for a sample: every simple annotation.
inline std::vector<std::string> valid_labels(const AnnotationSet& a) {
  if (a.simple.empty()) fail(ErrorCode::kMissingLabel, "sample has no annotations");
  return a.simple;
}

/// Distinct first annotations in order of appearance.
inline std::vector<std::string> candidate_labels(std::span<const SceneSample> samples) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : samples)
    if (seen.insert(first_annotation(s.annotations)).second) out.push_back(first_annotation(s.annotations));
  return out;
}

inline std::vector<embed::ModelInput> model_inputs(std::span<const SceneSample> samples, const embed::VideoConfig& video,
                                                   const embed::ClassPalette& palette = embed::ClassPalette::defaults()) {
  std::vector<embed::ModelInput> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(embed::make_input(s, video, palette));
  return out;
}

inline std::vector<embed::TrainExample> training_examples(std::span<const SceneSample> samples, const embed::VideoConfig& video,
                                                          const embed::ClassPalette& palette = embed::ClassPalette::defaults()) {
  std::vector<embed::TrainExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({embed::make_input(s, video, palette), first_annotation(s.annotations)});
  return out;
}

/// Index metadata: everything but the raw joints and masks.
inline nlohmann::json scene_metadata(const SceneSample& s) {
  return {{"annotations", manifest::to_json(s.annotations)}, {"frame_refs", s.frame_refs}, {"track_id", s.motion.track_id}};
}

inline index::VectorIndex build_index(const embed::Model& model, std::span<const SceneSample> samples) {
  index::VectorIndex idx(static_cast<std::uint32_t>(model.dim()));
  for (const auto& s : samples) {
    const embed::Vec v = model.encode_scene(embed::make_input(s, model.config().video));
    idx.insert(s.id, {v.data(), static_cast<size_t>(v.size())}, scene_metadata(s));
  }
  return idx;
}

inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Random single-person synthetic scenes with ground-truth annotations.
inline std::vector<SceneSample> generate_synthetic(size_t n, std::uint64_t seed, const synthetic::RandomSceneOptions& opt = {},
                                                   const std::string& prefix = "scene") {
  std::vector<SceneSample> out;
  const auto tables = synthetic::ClassTables::defaults();
  for (size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(sample_seed(seed, i));
    const auto recipe = synthetic::random_recipe(rng, opt);
    auto scene = synthetic::generate_synthetic_scene(recipe, rng(), prefix + "-" + std::to_string(i), tables);
    scene.sample.annotations = scene.ground_truth;
    out.push_back(std::move(scene.sample));
  }
  return out;
}

struct ToyOptions {
  size_t n_train = 600;
  size_t n_test = 200;
  std::uint64_t seed = 0;
  /// Two people per frame, each on its own ground class.
  bool two_person = false;
  std::vector<std::string> grounds = {"crosswalk", "sidewalk", "road"};
};

struct ToyDataset {
  std::vector<SceneSample> train;
  std::vector<SceneSample> test;
  std::vector<std::string> labels;  // all family x ground first annotations
};

/// Balanced family x ground dataset: sample i uses family i mod 4 and ground
/// (i / 4) mod 3; the first annotation is "<gerund> <ground>".
inline ToyDataset make_toy_dataset(const ToyOptions& o) {
  const auto tables = synthetic::ClassTables::defaults();
  auto make = [&](size_t n, std::uint64_t seed, const std::string& prefix) {
    std::vector<SceneSample> out;
    for (size_t i = 0; i < n; ++i) {
      synthetic::RandomSceneOptions opt;
      opt.family = motion::kAllFamilies[i % motion::kAllFamilies.size()];
      opt.ground = o.grounds[(i / motion::kAllFamilies.size()) % o.grounds.size()];
      opt.ground_classes = o.grounds;
      opt.fallback_prob = 0.0;
      opt.uniform_ground = !o.two_person;
      std::mt19937_64 rng(sample_seed(seed, i));
      const auto recipe = o.two_person ? synthetic::random_two_person_recipe(rng, opt) : synthetic::random_recipe(rng, opt);
      auto scene = synthetic::generate_synthetic_scene(recipe, rng(), prefix + "-" + std::to_string(i), tables);
      scene.sample.annotations = scene.ground_truth;
      out.push_back(std::move(scene.sample));
    }
    return out;
  };
  ToyDataset d;
  d.train = make(o.n_train, o.seed, "train");
  d.test = make(o.n_test, o.seed ^ 0x5bd1e995ULL, "test");
  for (auto f : motion::kAllFamilies)
    for (const auto& g : o.grounds) d.labels.push_back(motion::family_gerund(f) + " " + g);
  return d;
}

}  // namespace cmr::service
