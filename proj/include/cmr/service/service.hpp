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

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmr/core/manifest.hpp"
#include "cmr/embed/model.hpp"
#include "cmr/error.hpp"
#include "cmr/index/vector_index.hpp"
#include "cmr/service/config.hpp"
#include "cmr/service/pipeline.hpp"

namespace cmr::service {

struct Response {
  int status = 200;
  json body;
};

inline Response error_response(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", code}, {"message", message}}};
}

/// Transport-independent request handlers. The model is immutable once
/// loaded; the index and scene store follow a reader-writer discipline.
class RetrievalService {
 public:
  explicit RetrievalService(AppConfig cfg) : cfg_(std::move(cfg)), tables_(cfg_.class_tables()), annotator_(cfg_) {}

  void set_model(std::shared_ptr<const embed::Model> model, std::string version) {
    std::unique_lock lock(mutex_);
    model_ = std::move(model);
    model_version_ = std::move(version);
  }
  void set_index(std::shared_ptr<index::VectorIndex> idx) {
    std::unique_lock lock(mutex_);
    index_ = std::move(idx);
  }
  void add_scene(SceneSample s) {
    std::unique_lock lock(mutex_);
    const std::string id = s.id;
    scenes_.insert_or_assign(id, std::move(s));
  }

  /// POST /query {text, top_n}.
  Response query(const json& body) const {
    const auto start = std::chrono::steady_clock::now();
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string())
      return error_response(400, "ValidationError", "body must be an object with a string 'text'");
    const std::string text = body["text"].get<std::string>();
    int top_n = cfg_.service.default_top_n;
    if (body.contains("top_n")) {
      if (!body["top_n"].is_number_integer()) return error_response(400, "ValidationError", "top_n must be an integer");
      top_n = body["top_n"].get<int>();
    }
    if (top_n < 1 || top_n > cfg_.service.max_top_n)
      return error_response(400, "ValidationError", "top_n must lie in [1, " + std::to_string(cfg_.service.max_top_n) + "]");
    if (embed::tokenize(text).empty()) return error_response(400, "EmptyText", "query text has no content");

    std::shared_ptr<const embed::Model> model;
    std::shared_ptr<index::VectorIndex> idx;
    {
      std::shared_lock lock(mutex_);
      model = model_;
      idx = index_;
    }
    if (!model) return error_response(503, "ModelNotLoaded", "no model loaded");
    if (!idx || idx->size() == 0) return error_response(503, "IndexNotLoaded", "no index loaded");
    const embed::Vec t = model->encode_text(text);
    const auto hits = idx->query_topn({t.data(), static_cast<size_t>(t.size())}, static_cast<size_t>(top_n));
    json results = json::array();
    for (const auto& h : hits) results.push_back({{"id", h.id}, {"score", h.score}, {"metadata", idx->metadata(h.id)}});
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return {200, {{"results", results}, {"latency_ms", ms}}};
  }

  /// GET /scenes/{id}[?include=masks].
  Response scene(const std::string& id, bool include_masks) const {
    std::shared_lock lock(mutex_);
    auto it = scenes_.find(id);
    if (it != scenes_.end()) {
      json j = manifest::to_json(it->second, include_masks);
      return {200, j};
    }
    if (index_ && index_->contains(id)) {
      json j = index_->metadata(id);
      j["id"] = id;
      return {200, j};
    }
    return error_response(404, "NotFound", "unknown scene id '" + id + "'");
  }

  /// GET /health.
  Response health() const {
    std::shared_lock lock(mutex_);
    const bool ok = model_ != nullptr;
    return {200,
            {{"status", ok ? "ok" : "degraded"},
             {"index_size", index_ ? index_->size() : 0},
             {"model_version", ok ? json(model_version_) : json(nullptr)}}};
  }

  /// POST /scenes: one manifest record, validated like CLI ingest, then
  /// annotated (when it carries no annotations), embedded and indexed.
  Response ingest(const json& body) {
    SceneSample s;
    try {
      s = manifest::sample_from_json(body, tables_);
    } catch (const Error& e) {
      return error_response(400, std::string(to_string(e.code())), e.what());
    }
    std::shared_ptr<const embed::Model> model;
    {
      std::shared_lock lock(mutex_);
      model = model_;
    }
    if (!model) return error_response(503, "ModelNotLoaded", "no model loaded");
    try {
      if (s.annotations.simple.empty()) annotator_.annotate(s);
      const embed::Vec v = model->encode_scene(embed::make_input(s, model->config().video));
      std::unique_lock lock(mutex_);
      if (!index_) index_ = std::make_shared<index::VectorIndex>(static_cast<std::uint32_t>(model->dim()));
      index_->insert(s.id, {v.data(), static_cast<size_t>(v.size())}, scene_metadata(s));
      const std::string id = s.id;
      scenes_.insert_or_assign(id, std::move(s));
      return {201, {{"id", id}, {"index_size", index_->size()}}};
    } catch (const Error& e) {
      const int status = e.code() == ErrorCode::kDuplicateId ? 409 : 400;
      return error_response(status, std::string(to_string(e.code())), e.what());
    }
  }

  const AppConfig& config() const { return cfg_; }

 private:
  AppConfig cfg_;
  synthetic::ClassTables tables_;
  Annotator annotator_;
  mutable std::shared_mutex mutex_;
  std::shared_ptr<const embed::Model> model_;
  std::string model_version_;
  std::shared_ptr<index::VectorIndex> index_;
  std::map<std::string, SceneSample> scenes_;
};

}  // namespace cmr::service
