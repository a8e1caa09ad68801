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
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmr/embed/model.hpp"
#include "cmr/error.hpp"
#include "cmr/index/vector_index.hpp"

namespace cmr::eval {

using embed::Vec;

inline const std::vector<int> kDefaultKs = {1, 2, 3, 5};

struct EvalReport {
  std::string protocol;
  std::vector<int> ks;
  std::map<int, double> accuracy;  // percent
  size_t n_samples = 0;
  size_t candidate_set_size = 0;
};

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [k, v] : r.accuracy) acc[std::to_string(k)] = v;
  return {{"protocol", r.protocol},
          {"k_values", r.ks},
          {"accuracies", acc},
          {"n_samples", r.n_samples},
          {"candidate_set_size", r.candidate_set_size}};
}

inline std::string format_table(const EvalReport& r) {
  std::string out = "protocol: " + r.protocol + "  samples: " + std::to_string(r.n_samples);
  if (r.candidate_set_size) out += "  candidates: " + std::to_string(r.candidate_set_size);
  out += "\n   k  accuracy\n";
  char line[64];
  for (int k : r.ks) {
    std::snprintf(line, sizeof line, "%4d  %7.2f%%\n", k, r.accuracy.at(k));
    out += line;
  }
  return out;
}

inline void check_ks(const std::vector<int>& ks) {
  if (ks.empty()) fail(ErrorCode::kInvalidConfig, "at least one k is required");
  for (int k : ks)
    if (k < 1) fail(ErrorCode::kInvalidConfig, "k must be positive");
}

/// Rank (0-based) of the best-ranked truth label among candidates sorted by
/// descending cosine; ties keep candidate order.
inline size_t best_truth_rank(const Vec& scene, const std::vector<Vec>& candidates, const std::vector<size_t>& truth) {
  std::vector<double> sims(candidates.size());
  for (size_t c = 0; c < candidates.size(); ++c) sims[c] = scene.dot(candidates[c]) / (scene.norm() * candidates[c].norm());
  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return sims[a] > sims[b]; });
  for (size_t r = 0; r < order.size(); ++r)
    if (std::find(truth.begin(), truth.end(), order[r]) != truth.end()) return r;
  return order.size();
}

/// Label-ranking accuracy from precomputed embeddings. `truths[i]` holds the
/// valid labels of sample i; the first must be a candidate.
inline EvalReport topk_label_accuracy(const std::vector<Vec>& scene_embeddings, const std::vector<std::vector<std::string>>& truths,
                                      const std::vector<std::string>& candidates, const std::vector<Vec>& candidate_embeddings,
                                      const std::vector<int>& ks = kDefaultKs) {
  check_ks(ks);
  if (scene_embeddings.size() != truths.size() || candidates.size() != candidate_embeddings.size())
    fail(ErrorCode::kShapeMismatch, "embedding and label counts differ");
  if (scene_embeddings.empty()) fail(ErrorCode::kEmptyInput, "no samples to evaluate");
  std::map<std::string, size_t> pos;
  for (size_t c = 0; c < candidates.size(); ++c) pos.emplace(candidates[c], c);
  std::vector<size_t> ranks;
  for (size_t i = 0; i < truths.size(); ++i) {
    if (truths[i].empty() || !pos.count(truths[i].front()))
      fail(ErrorCode::kMissingLabel, "sample " + std::to_string(i) + " has no ground-truth label in the candidate set");
    std::vector<size_t> t;
    for (const auto& l : truths[i])
      if (auto it = pos.find(l); it != pos.end()) t.push_back(it->second);
    ranks.push_back(best_truth_rank(scene_embeddings[i], candidate_embeddings, t));
  }
  EvalReport r{"label", ks, {}, truths.size(), candidates.size()};
  for (int k : ks) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [&](size_t rank) { return rank < static_cast<size_t>(k); });
    r.accuracy[k] = 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return r;
}

inline EvalReport topk_label_accuracy(const embed::Model& model, const std::vector<embed::ModelInput>& inputs,
                                      const std::vector<std::vector<std::string>>& truths,
                                      const std::vector<std::string>& candidates, const std::vector<int>& ks = kDefaultKs) {
  std::vector<Vec> scenes, cands;
  for (const auto& in : inputs) scenes.push_back(model.encode_scene(in));
  for (const auto& c : candidates) cands.push_back(model.encode_text(c));
  return topk_label_accuracy(scenes, truths, candidates, cands, ks);
}

struct RecallQuery {
  std::string sample_id;
  std::string text;
};

/// Instance retrieval: each annotation text queries the index and is a hit
/// when its source sample appears in the top k.
inline EvalReport recall_at_k(const embed::Model& model, const index::VectorIndex& idx, const std::vector<RecallQuery>& queries,
                              const std::vector<int>& ks = kDefaultKs) {
  check_ks(ks);
  if (idx.size() == 0) fail(ErrorCode::kEmptyIndex, "index is empty");
  if (queries.empty()) fail(ErrorCode::kEmptyInput, "no queries to evaluate");
  const size_t kmax = static_cast<size_t>(*std::max_element(ks.begin(), ks.end()));
  std::vector<size_t> ranks;
  for (const auto& q : queries) {
    if (!idx.contains(q.sample_id)) fail(ErrorCode::kMissingLabel, "queried sample '" + q.sample_id + "' is not indexed");
    const Vec t = model.encode_text(q.text);
    const auto hits = idx.query_topn({t.data(), static_cast<size_t>(t.size())}, kmax);
    size_t rank = kmax;
    for (size_t r = 0; r < hits.size(); ++r)
      if (hits[r].id == q.sample_id) {
        rank = r;
        break;
      }
    ranks.push_back(rank);
  }
  EvalReport r{"recall", ks, {}, queries.size(), idx.size()};
  for (int k : ks) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [&](size_t rank) { return rank < static_cast<size_t>(k); });
    r.accuracy[k] = 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return r;
}

}  // namespace cmr::eval
