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
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmr/annotate/composer.hpp"
#include "cmr/context/labeler.hpp"
#include "cmr/core/synthetic.hpp"
#include "cmr/embed/losses.hpp"
#include "cmr/embed/model.hpp"
#include "cmr/embed/train.hpp"
#include "cmr/error.hpp"
#include "cmr/motion/labeling.hpp"
#include "cmr/motion/lowess.hpp"
#include "cmr/motion/segments.hpp"

namespace cmr::service {

using nlohmann::json;

struct ServiceConfig {
  int port = 8080;
  std::string host = "0.0.0.0";
  std::string model_path;
  std::string index_path;
  std::string manifest_path;
  int default_top_n = 10;
  int max_top_n = 1000;
};

/// Every module configuration in one place, loadable from a JSON file.
struct AppConfig {
  motion::ValidityConfig validity;
  motion::LowessConfig lowess;
  context::ContextConfig context;
  std::vector<std::string> object_classes = synthetic::default_object_class_names();
  std::vector<std::string> ground_classes = synthetic::default_ground_class_names();
  std::vector<std::string> motion_excluded = motion::MotionVocabulary::kDefaultExcluded;
  double motion_threshold = motion::MotionVocabulary::kDefaultThreshold;
  std::map<std::string, std::vector<std::string>> synonyms = annotate::SynonymTable::defaults().words();
  embed::ModelConfig model;
  embed::LossConfig loss;
  embed::TrainConfig train;
  ServiceConfig service;
  std::uint64_t seed = 0;

  synthetic::ClassTables class_tables() const {
    return {std::make_shared<const ClassTable>(ClassTable::from_names(object_classes)),
            std::make_shared<const ClassTable>(ClassTable::from_names(ground_classes))};
  }
  annotate::SynonymTable synonym_table() const { return annotate::SynonymTable(synonyms); }
  motion::MotionVocabulary motion_vocabulary() const {
    return motion::default_motion_vocabulary(motion_excluded, motion_threshold);
  }

  void validate() const {
    validity.validate();
    lowess.validate();
    context.validate();
    model.validate();
    loss.validate();
    train.validate();
    synonym_table();
    if (service.max_top_n < 1 || service.default_top_n < 1 || service.default_top_n > service.max_top_n)
      fail(ErrorCode::kInvalidConfig, "service top_n limits must satisfy 1 <= default <= max");
    if (service.port <= 0 || service.port > 65535) fail(ErrorCode::kInvalidConfig, "port out of range");
  }
};

namespace detail {
template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace detail

inline json to_json(const AppConfig& c) {
  const auto& r = c.context.regions;
  return {
      {"seed", c.seed},
      {"validity", {{"min_box_w", c.validity.min_box_w}, {"min_box_h", c.validity.min_box_h},
                    {"seq_len", c.validity.seq_len}, {"max_gap", c.validity.max_gap}}},
      {"lowess", {{"frac", c.lowess.frac}, {"robust_iters", c.lowess.robust_iters}}},
      {"context", {{"regions", {{"lateral_in", r.lateral_in}, {"lateral_out", r.lateral_out},
                                {"lateral_v_lo", r.lateral_v_lo}, {"lateral_v_hi", r.lateral_v_hi},
                                {"behind_depth", r.behind_depth}, {"ground_depth", r.ground_depth},
                                {"min_class_frac", r.min_class_frac}, {"min_class_px", r.min_class_px}}},
                   {"ground_classes", c.context.ground.classes},
                   {"ignored", c.context.ignored},
                   {"excluded_objects", c.context.excluded_objects}}},
      {"classes", {{"object", c.object_classes}, {"ground", c.ground_classes}}},
      {"motion_vocabulary", {{"excluded", c.motion_excluded}, {"threshold", c.motion_threshold}}},
      {"synonyms", c.synonyms},
      {"model", embed::to_json(c.model)},
      {"loss", {{"kind", embed::loss_name(c.loss.kind)}, {"tau", c.loss.tau}}},
      {"train", {{"batch_size", c.train.batch_size}, {"lr_start", c.train.lr_start}, {"lr_end", c.train.lr_end},
                 {"epochs", c.train.epochs}, {"weight_decay", c.train.weight_decay}, {"freeze_text", c.train.freeze_text}}},
      {"service", {{"host", c.service.host}, {"port", c.service.port}, {"model_path", c.service.model_path},
                   {"index_path", c.service.index_path}, {"manifest_path", c.service.manifest_path},
                   {"default_top_n", c.service.default_top_n}, {"max_top_n", c.service.max_top_n}}},
  };
}

/// Missing keys keep their defaults.
inline AppConfig config_from_json(const json& j) {
  using detail::read;
  AppConfig c;
  try {
    read(j, "seed", c.seed);
    if (j.contains("validity")) {
      const auto& v = j["validity"];
      read(v, "min_box_w", c.validity.min_box_w);
      read(v, "min_box_h", c.validity.min_box_h);
      read(v, "seq_len", c.validity.seq_len);
      read(v, "max_gap", c.validity.max_gap);
    }
    if (j.contains("lowess")) {
      read(j["lowess"], "frac", c.lowess.frac);
      read(j["lowess"], "robust_iters", c.lowess.robust_iters);
    }
    if (j.contains("context")) {
      const auto& cx = j["context"];
      if (cx.contains("regions")) {
        const auto& r = cx["regions"];
        auto& o = c.context.regions;
        read(r, "lateral_in", o.lateral_in);
        read(r, "lateral_out", o.lateral_out);
        read(r, "lateral_v_lo", o.lateral_v_lo);
        read(r, "lateral_v_hi", o.lateral_v_hi);
        read(r, "behind_depth", o.behind_depth);
        read(r, "ground_depth", o.ground_depth);
        read(r, "min_class_frac", o.min_class_frac);
        read(r, "min_class_px", o.min_class_px);
      }
      read(cx, "ground_classes", c.context.ground.classes);
      read(cx, "ignored", c.context.ignored);
      read(cx, "excluded_objects", c.context.excluded_objects);
    }
    if (j.contains("classes")) {
      read(j["classes"], "object", c.object_classes);
      read(j["classes"], "ground", c.ground_classes);
    }
    if (j.contains("motion_vocabulary")) {
      read(j["motion_vocabulary"], "excluded", c.motion_excluded);
      read(j["motion_vocabulary"], "threshold", c.motion_threshold);
    }
    read(j, "synonyms", c.synonyms);
    if (j.contains("model")) c.model = embed::model_config_from_json(j["model"]);
    if (j.contains("loss")) {
      if (j["loss"].contains("kind")) c.loss.kind = embed::parse_loss(j["loss"]["kind"].get<std::string>());
      read(j["loss"], "tau", c.loss.tau);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      read(t, "batch_size", c.train.batch_size);
      read(t, "lr_start", c.train.lr_start);
      read(t, "lr_end", c.train.lr_end);
      read(t, "epochs", c.train.epochs);
      read(t, "weight_decay", c.train.weight_decay);
      read(t, "freeze_text", c.train.freeze_text);
    }
    if (j.contains("service")) {
      const auto& s = j["service"];
      read(s, "host", c.service.host);
      read(s, "port", c.service.port);
      read(s, "model_path", c.service.model_path);
      read(s, "index_path", c.service.index_path);
      read(s, "manifest_path", c.service.manifest_path);
      read(s, "default_top_n", c.service.default_top_n);
      read(s, "max_top_n", c.service.max_top_n);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("bad config: ") + e.what());
  }
  c.train.seed = c.seed;
  c.validate();
  return c;
}

inline AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, "config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

}  // namespace cmr::service
