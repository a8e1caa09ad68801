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

#include <cctype>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cmr/core/types.hpp"
#include "cmr/embed/layers.hpp"
#include "cmr/embed/video.hpp"
#include "cmr/error.hpp"

namespace cmr::embed {

inline constexpr int kMotionInputDim = kSequenceLength * kNumJoints * 3;

/// Lowercases, strips punctuation and articles, splits on whitespace.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::string clean;
  clean.reserve(text.size());
  for (unsigned char c : text) clean += std::isalnum(c) || c == '-' ? static_cast<char>(std::tolower(c)) : ' ';
  std::istringstream in(clean);
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;)
    if (tok != "a" && tok != "an" && tok != "the") tokens.push_back(tok);
  return tokens;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

/// Hashed bag-of-words text encoder: token buckets are summed, then mapped
/// through one tanh hidden layer.
struct TextEncoder {
  Param buckets;  // hidden x num_buckets
  Mlp mlp;

  TextEncoder() = default;
  TextEncoder(int num_buckets, int hidden, int dim, std::mt19937_64& rng)
      : buckets("text.buckets", hidden, num_buckets), mlp("text.mlp", hidden, hidden, dim, rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index i = 0; i < buckets.value.size(); ++i) buckets.value.data()[i] = n(rng);
  }

  Vec bag(const std::string& text) const {
    const auto tokens = tokenize(text);
    if (tokens.empty()) fail(ErrorCode::kEmptyText, "text has no content tokens");
    Vec s = Vec::Zero(buckets.value.rows());
    for (const auto& t : tokens) s += buckets.value.col(static_cast<Eigen::Index>(fnv1a(t) % buckets.value.cols()));
    return s;
  }

  Vec forward(const std::string& text) const { return mlp.forward(bag(text)); }

  void collect(ParamList& out) {
    out.push_back(&buckets);
    mlp.collect(out);
  }
};

/// Flattened 20 x 24 x 3 joint positions -> tanh hidden layer -> embedding.
struct MotionEncoder {
  Mlp mlp;

  MotionEncoder() = default;
  MotionEncoder(int hidden, int dim, std::mt19937_64& rng) : mlp("motion.mlp", kMotionInputDim, hidden, dim, rng) {}

  static Vec flatten(const MotionSequence& seq) {
    if (seq.frames.size() != kSequenceLength) fail(ErrorCode::kShapeMismatch, "motion encoder expects 20 frames");
    Vec x(kMotionInputDim);
    Eigen::Index i = 0;
    for (const Pose& p : seq.frames)
      for (const Vec3& v : p) {
        x[i++] = v.x;
        x[i++] = v.y;
        x[i++] = v.z;
      }
    return x;
  }

  Vec forward(const Vec& x, Mlp::Cache* cache = nullptr) const {
    if (x.size() != kMotionInputDim) fail(ErrorCode::kShapeMismatch, "motion input must have 1440 values");
    return mlp.forward(x, cache);
  }
  Vec backward(const Mlp::Cache& c, const Vec& dy) { return mlp.backward(c, dy); }
  void collect(ParamList& out) { mlp.collect(out); }
};

/// Patch-mean video features -> tanh hidden layer -> embedding.
struct VideoEncoder {
  Mlp mlp;
  VideoConfig cfg;

  VideoEncoder() = default;
  VideoEncoder(const VideoConfig& c, int hidden, int dim, std::mt19937_64& rng)
      : mlp("video.mlp", c.feature_dim(), hidden, dim, rng), cfg(c) {}

  Vec forward(const Vec& features, Mlp::Cache* cache = nullptr) const {
    if (features.size() != cfg.feature_dim()) fail(ErrorCode::kShapeMismatch, "video features have the wrong size");
    return mlp.forward(features, cache);
  }
  Vec forward_frames(const std::vector<RgbImage>& frames) const { return forward(video_features(frames, cfg)); }
  Vec backward(const Mlp::Cache& c, const Vec& dy) { return mlp.backward(c, dy); }
  void collect(ParamList& out) { mlp.collect(out); }
};

}  // namespace cmr::embed
