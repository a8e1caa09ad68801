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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmr/core/types.hpp"
#include "cmr/embed/encoders.hpp"
#include "cmr/embed/fusion.hpp"
#include "cmr/embed/layers.hpp"
#include "cmr/embed/video.hpp"
#include "cmr/error.hpp"

namespace cmr::embed {

static_assert(std::endian::native == std::endian::little, "model files are written in native little-endian order");

inline constexpr char kModelMagic[4] = {'C', 'M', 'R', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

struct ModelConfig {
  int dim = 512;
  int text_buckets = 4096;
  int text_hidden = 64;
  int motion_hidden = 256;
  int video_hidden = 128;
  FusionConfig fusion;
  VideoConfig video;
  std::uint64_t seed = 0;

  void validate() const {
    if (dim < 2) fail(ErrorCode::kInvalidConfig, "embedding dimension must be at least 2");
    if (text_buckets <= 0 || text_hidden <= 0 || motion_hidden <= 0 || video_hidden <= 0)
      fail(ErrorCode::kInvalidConfig, "encoder widths must be positive");
    fusion.validate(dim);
    video.validate();
  }
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"dim", c.dim},
          {"text_buckets", c.text_buckets},
          {"text_hidden", c.text_hidden},
          {"motion_hidden", c.motion_hidden},
          {"video_hidden", c.video_hidden},
          {"fusion", fusion_name(c.fusion.strategy)},
          {"dropout", c.fusion.dropout_p},
          {"heads", c.fusion.heads},
          {"projection_hidden", c.fusion.projection_hidden},
          {"video", {{"width", c.video.width},
                     {"height", c.video.height},
                     {"patch_cols", c.video.patch_cols},
                     {"patch_rows", c.video.patch_rows},
                     {"focus_box", c.video.focus_box}}},
          {"seed", c.seed}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.dim = j.value("dim", c.dim);
    c.text_buckets = j.value("text_buckets", c.text_buckets);
    c.text_hidden = j.value("text_hidden", c.text_hidden);
    c.motion_hidden = j.value("motion_hidden", c.motion_hidden);
    c.video_hidden = j.value("video_hidden", c.video_hidden);
    c.fusion.strategy = parse_fusion(j.value("fusion", fusion_name(c.fusion.strategy)));
    c.fusion.dropout_p = j.value("dropout", c.fusion.dropout_p);
    c.fusion.heads = j.value("heads", c.fusion.heads);
    c.fusion.projection_hidden = j.value("projection_hidden", c.fusion.projection_hidden);
    if (j.contains("video")) {
      const auto& v = j.at("video");
      c.video.width = v.value("width", c.video.width);
      c.video.height = v.value("height", c.video.height);
      c.video.patch_cols = v.value("patch_cols", c.video.patch_cols);
      c.video.patch_rows = v.value("patch_rows", c.video.patch_rows);
      c.video.focus_box = v.value("focus_box", c.video.focus_box);
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("bad model config: ") + e.what());
  }
  c.validate();
  return c;
}

/// Per-sample network inputs: flattened joints and pooled video features.
struct ModelInput {
  Vec motion;
  Vec video;
};

inline ModelInput make_input(const SceneSample& s, const VideoConfig& cfg, const ClassPalette& palette = ClassPalette::defaults()) {
  return {MotionEncoder::flatten(s.motion), video_features(render_clip(s, cfg, palette), cfg)};
}

/// Text, motion and video encoders with the fusion and projection heads.
class Model {
 public:
  struct Cache {
    Mlp::Cache motion, video;
    Vec fm, fv;
    Fusion::Cache fusion;
    Projection::Cache projection;
  };

  Model() = default;
  explicit Model(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937_64 rng(cfg_.seed);
    text_ = TextEncoder(cfg_.text_buckets, cfg_.text_hidden, cfg_.dim, rng);
    motion_ = MotionEncoder(cfg_.motion_hidden, cfg_.dim, rng);
    video_ = VideoEncoder(cfg_.video, cfg_.video_hidden, cfg_.dim, rng);
    fusion_ = Fusion(cfg_.fusion, cfg_.dim, rng);
    projection_ = Projection(fusion_.output_dim(), cfg_.fusion.projection_hidden, cfg_.dim, cfg_.fusion.dropout_p, rng);
  }

  const ModelConfig& config() const { return cfg_; }
  int dim() const { return cfg_.dim; }

  /// Unnormalized f_z. A non-null `dropout_rng` selects train mode.
  Vec forward(const ModelInput& in, std::mt19937_64* dropout_rng = nullptr, Cache* cache = nullptr) const {
    Cache c;
    c.fm = motion_.forward(in.motion, &c.motion);
    c.fv = video_.forward(in.video, &c.video);
    const Vec fk = fusion_.forward(c.fm, c.fv, &c.fusion);
    Vec fz = projection_.forward(fk, dropout_rng, &c.projection);
    if (cache) *cache = std::move(c);
    return fz;
  }

  /// Accumulates parameter gradients given dL/df_z; returns input gradients.
  ModelInput backward(const Cache& c, const Vec& dfz) {
    const Vec dfk = projection_.backward(c.projection, dfz);
    const auto [dfm, dfv] = fusion_.backward(c.fusion, dfk);
    return {motion_.backward(c.motion, dfm), video_.backward(c.video, dfv)};
  }

  /// Eval-mode, l2-normalized scene embedding.
  Vec encode_scene(const ModelInput& in) const { return l2_normalize(forward(in)); }

  Vec encode_text_raw(const std::string& text, Mlp::Cache* cache = nullptr) const {
    return text_.mlp.forward(text_.bag(text), cache);
  }
  Vec encode_text(const std::string& text) const { return l2_normalize(encode_text_raw(text)); }

  /// Gradient into the text encoder for dL/df_t (used when it is not frozen).
  void text_backward(const std::string& text, const Mlp::Cache& c, const Vec& dft) {
    const Vec dbag = text_.mlp.backward(c, dft);
    for (const auto& t : tokenize(text))
      text_.buckets.grad.col(static_cast<Eigen::Index>(fnv1a(t) % text_.buckets.grad.cols())) += dbag;
  }

  ParamList text_params() {
    ParamList p;
    text_.collect(p);
    return p;
  }

  ParamList scene_params() {
    ParamList p;
    motion_.collect(p);
    video_.collect(p);
    fusion_.collect(p);
    projection_.collect(p);
    return p;
  }

  ParamList all_params() {
    ParamList p = text_params();
    for (Param* q : scene_params()) p.push_back(q);
    return p;
  }

  void zero_grad() {
    for (Param* p : all_params()) p->zero_grad();
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write model file '" + path + "'");
    auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    out.write(kModelMagic, 4);
    put32(kModelVersion);
    put32(static_cast<std::uint32_t>(cfg_.dim));
    const std::string config = to_json(cfg_).dump();
    put32(static_cast<std::uint32_t>(config.size()));
    out.write(config.data(), static_cast<std::streamsize>(config.size()));
    auto params = const_cast<Model*>(this)->all_params();
    put32(static_cast<std::uint32_t>(params.size()));
    for (const Param* p : params) {
      put32(static_cast<std::uint32_t>(p->name.size()));
      out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
      put32(static_cast<std::uint32_t>(p->value.rows()));
      put32(static_cast<std::uint32_t>(p->value.cols()));
      const Eigen::MatrixXf f = p->value.cast<float>();
      out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
    }
    if (!out) fail(ErrorCode::kIo, "failed writing model file '" + path + "'");
  }

  static Model load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::kIo, "cannot open model file '" + path + "'");
    auto get = [&](void* dst, size_t n) {
      in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
      if (!in) fail(ErrorCode::kCorruptFile, "model file '" + path + "' is truncated");
    };
    auto get32 = [&] {
      std::uint32_t v;
      get(&v, 4);
      return v;
    };
    char magic[4];
    get(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0) fail(ErrorCode::kCorruptFile, "'" + path + "' is not a model file");
    if (get32() != kModelVersion) fail(ErrorCode::kVersionMismatch, "unsupported model file version");
    const std::uint32_t dim = get32();
    std::string config(get32(), '\0');
    get(config.data(), config.size());
    ModelConfig cfg;
    try {
      cfg = model_config_from_json(nlohmann::json::parse(config));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kCorruptFile, std::string("model config block unreadable: ") + e.what());
    }
    if (static_cast<std::uint32_t>(cfg.dim) != dim) fail(ErrorCode::kCorruptFile, "model header and config disagree on dim");
    Model m(cfg);
    std::map<std::string, Param*> by_name;
    for (Param* p : m.all_params()) by_name[p->name] = p;
    const std::uint32_t count = get32();
    if (count != by_name.size()) fail(ErrorCode::kCorruptFile, "model file has the wrong number of tensors");
    for (std::uint32_t i = 0; i < count; ++i) {
      std::string name(get32(), '\0');
      get(name.data(), name.size());
      const std::uint32_t rows = get32(), cols = get32();
      auto it = by_name.find(name);
      if (it == by_name.end()) fail(ErrorCode::kCorruptFile, "unexpected tensor '" + name + "'");
      Param& p = *it->second;
      if (rows != p.value.rows() || cols != p.value.cols()) fail(ErrorCode::kCorruptFile, "tensor '" + name + "' has the wrong shape");
      Eigen::MatrixXf f(rows, cols);
      get(f.data(), f.size() * sizeof(float));
      p.value = f.cast<double>();
    }
    return m;
  }

  TextEncoder& text() { return text_; }
  MotionEncoder& motion() { return motion_; }
  VideoEncoder& video() { return video_; }
  Fusion& fusion() { return fusion_; }
  Projection& projection() { return projection_; }
  const Fusion& fusion() const { return fusion_; }
  const Projection& projection() const { return projection_; }

 private:
  ModelConfig cfg_;
  TextEncoder text_;
  MotionEncoder motion_;
  VideoEncoder video_;
  Fusion fusion_;
  Projection projection_;
};

}  // namespace cmr::embed
