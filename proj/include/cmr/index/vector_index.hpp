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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "cmr/error.hpp"

namespace cmr::index {

static_assert(std::endian::native == std::endian::little, "index files are written in native little-endian order");

inline constexpr char kIndexMagic[4] = {'C', 'M', 'I', 'X'};
inline constexpr std::uint32_t kIndexVersion = 1;

struct Hit {
  std::string id;
  double score = 0;
  friend bool operator==(const Hit&, const Hit&) = default;
};

/// Exact cosine top-k store. Vectors are normalized on insert and kept as
/// contiguous float32 rows; scores accumulate in double.
class VectorIndex {
 public:
  explicit VectorIndex(std::uint32_t dim) : dim_(dim) {
    if (dim == 0) fail(ErrorCode::kInvalidConfig, "index dimension must be positive");
  }

  VectorIndex(VectorIndex&& o) noexcept {
    std::unique_lock lock(o.mutex_);
    dim_ = o.dim_;
    ids_ = std::move(o.ids_);
    rows_ = std::move(o.rows_);
    metadata_ = std::move(o.metadata_);
    position_ = std::move(o.position_);
  }

  std::uint32_t dim() const { return dim_; }

  size_t size() const {
    std::shared_lock lock(mutex_);
    return ids_.size();
  }

  void insert(const std::string& id, std::span<const double> vec, nlohmann::json metadata = nlohmann::json::object()) {
    if (vec.size() != dim_) fail(ErrorCode::kDimMismatch, "vector has dimension " + std::to_string(vec.size()) +
                                                              ", index expects " + std::to_string(dim_));
    double sq = 0;
    for (double v : vec) sq += v * v;
    const double norm = std::sqrt(sq);
    if (!(norm > 0) || !std::isfinite(norm)) fail(ErrorCode::kNormalizationFailure, "cannot normalize vector for '" + id + "'");
    std::vector<float> row(dim_);
    for (size_t i = 0; i < dim_; ++i) row[i] = static_cast<float>(vec[i] / norm);
    std::unique_lock lock(mutex_);
    if (position_.count(id)) fail(ErrorCode::kDuplicateId, "id '" + id + "' already indexed");
    position_.emplace(id, ids_.size());
    ids_.push_back(id);
    rows_.insert(rows_.end(), row.begin(), row.end());
    metadata_.push_back(std::move(metadata));
  }

  /// Top-n by descending cosine; equal scores keep insertion order.
  std::vector<Hit> query_topn(std::span<const double> q, size_t n) const {
    if (n < 1) fail(ErrorCode::kOutOfBounds, "n must be at least 1");
    if (q.size() != dim_) fail(ErrorCode::kDimMismatch, "query has the wrong dimension");
    double sq = 0;
    for (double v : q) sq += v * v;
    const double norm = std::sqrt(sq);
    if (!(norm > 0) || !std::isfinite(norm)) fail(ErrorCode::kNormalizationFailure, "cannot normalize query vector");
    std::vector<double> qn(q.begin(), q.end());
    for (double& v : qn) v /= norm;

    std::shared_lock lock(mutex_);
    const size_t count = ids_.size();
    if (count == 0) fail(ErrorCode::kEmptyIndex, "index is empty");
    std::vector<double> scores(count);
    for (size_t r = 0; r < count; ++r) {
      const float* row = rows_.data() + r * dim_;
      double s = 0;
      for (size_t i = 0; i < dim_; ++i) s += qn[i] * static_cast<double>(row[i]);
      scores[r] = s;
    }
    const size_t k = std::min(n, count);
    std::vector<size_t> order(count);
    for (size_t i = 0; i < count; ++i) order[i] = i;
    auto better = [&](size_t a, size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
    std::vector<Hit> hits;
    hits.reserve(k);
    for (size_t i = 0; i < k; ++i) hits.push_back({ids_[order[i]], scores[order[i]]});
    return hits;
  }

  bool contains(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return position_.count(id) > 0;
  }

  nlohmann::json metadata(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = position_.find(id);
    if (it == position_.end()) fail(ErrorCode::kNotFound, "unknown id '" + id + "'");
    return metadata_[it->second];
  }

  std::vector<float> vector(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = position_.find(id);
    if (it == position_.end()) fail(ErrorCode::kNotFound, "unknown id '" + id + "'");
    const float* row = rows_.data() + it->second * dim_;
    return {row, row + dim_};
  }

  std::vector<std::string> ids() const {
    std::shared_lock lock(mutex_);
    return ids_;
  }

  /// Layout: magic, version u32, dim u32, count u64, crc32 u32 of the body,
  /// then body = id table (u32 length + bytes each), float32 rows, u64 json
  /// length + metadata array.
  void persist(const std::string& path) const {
    std::string body;
    std::shared_lock lock(mutex_);
    auto put = [&](const void* p, size_t n) { body.append(static_cast<const char*>(p), n); };
    for (const auto& id : ids_) {
      const auto len = static_cast<std::uint32_t>(id.size());
      put(&len, 4);
      put(id.data(), id.size());
    }
    put(rows_.data(), rows_.size() * sizeof(float));
    const std::string meta = nlohmann::json(metadata_).dump();
    const auto mlen = static_cast<std::uint64_t>(meta.size());
    put(&mlen, 8);
    put(meta.data(), meta.size());
    const std::uint64_t count = ids_.size();
    lock.unlock();

    const auto crc = static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write index file '" + path + "'");
    out.write(kIndexMagic, 4);
    out.write(reinterpret_cast<const char*>(&kIndexVersion), 4);
    out.write(reinterpret_cast<const char*>(&dim_), 4);
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(&crc), 4);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) fail(ErrorCode::kIo, "failed writing index file '" + path + "'");
  }

  static VectorIndex load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::kIo, "cannot open index file '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    constexpr size_t kHeader = 24;
    if (data.size() < kHeader) fail(ErrorCode::kCorruptFile, "index file is truncated");
    if (std::memcmp(data.data(), kIndexMagic, 4) != 0) fail(ErrorCode::kCorruptFile, "'" + path + "' is not an index file");
    std::uint32_t version, dim, crc;
    std::uint64_t count;
    std::memcpy(&version, data.data() + 4, 4);
    std::memcpy(&dim, data.data() + 8, 4);
    std::memcpy(&count, data.data() + 12, 8);
    std::memcpy(&crc, data.data() + 20, 4);
    if (version != kIndexVersion) fail(ErrorCode::kVersionMismatch, "index file version " + std::to_string(version) + " unsupported");
    const char* body = data.data() + kHeader;
    const size_t body_size = data.size() - kHeader;
    if (crc32(0L, reinterpret_cast<const Bytef*>(body), static_cast<uInt>(body_size)) != crc)
      fail(ErrorCode::kCorruptFile, "index checksum mismatch");

    size_t pos = 0;
    auto take = [&](void* dst, size_t n) {
      if (pos + n > body_size) fail(ErrorCode::kCorruptFile, "index body is truncated");
      std::memcpy(dst, body + pos, n);
      pos += n;
    };
    VectorIndex idx(dim);
    idx.ids_.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint32_t len;
      take(&len, 4);
      std::string id(len, '\0');
      take(id.data(), len);
      if (!idx.position_.emplace(id, idx.ids_.size()).second) fail(ErrorCode::kCorruptFile, "duplicate id in index file");
      idx.ids_.push_back(std::move(id));
    }
    idx.rows_.resize(count * dim);
    take(idx.rows_.data(), idx.rows_.size() * sizeof(float));
    std::uint64_t mlen;
    take(&mlen, 8);
    std::string meta(mlen, '\0');
    take(meta.data(), meta.size());
    try {
      idx.metadata_ = nlohmann::json::parse(meta).get<std::vector<nlohmann::json>>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kCorruptFile, std::string("index metadata unreadable: ") + e.what());
    }
    if (idx.metadata_.size() != count || pos != body_size) fail(ErrorCode::kCorruptFile, "index body size mismatch");
    return idx;
  }

 private:
  std::uint32_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> rows_;
  std::vector<nlohmann::json> metadata_;
  std::unordered_map<std::string, size_t> position_;
  mutable std::shared_mutex mutex_;
};

}  // namespace cmr::index
