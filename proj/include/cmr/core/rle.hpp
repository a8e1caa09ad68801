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
#include <span>
#include <string>
#include <vector>

#include "cmr/core/types.hpp"
#include "cmr/error.hpp"

namespace cmr {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

struct Run {
  ClassId class_id = 0;
  std::uint32_t length = 0;

  friend bool operator==(const Run&, const Run&) = default;
};

/// Row-major runs over the whole raster; runs continue across row boundaries.
inline std::vector<Run> rle_runs(const ClassRaster& raster) {
  if (raster.data.empty()) fail(ErrorCode::kEmptyInput, "cannot run-length encode an empty raster");
  std::vector<Run> runs;
  runs.push_back({raster.data.front(), 0});
  for (ClassId id : raster.data) {
    if (id != runs.back().class_id) runs.push_back({id, 0});
    ++runs.back().length;
  }
  return runs;
}

/// Binary layout: repeated (u16 class_id, u32 run_len), little-endian, packed.
inline std::vector<std::uint8_t> rle_encode(const ClassRaster& raster) {
  const auto runs = rle_runs(raster);
  std::vector<std::uint8_t> out(runs.size() * 6);
  std::uint8_t* p = out.data();
  for (const Run& r : runs) {
    std::memcpy(p, &r.class_id, 2);
    std::memcpy(p + 2, &r.length, 4);
    p += 6;
  }
  return out;
}

inline std::vector<Run> rle_parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 6 != 0) fail(ErrorCode::kCorruptFile, "RLE byte stream length is not a multiple of 6");
  std::vector<Run> runs(bytes.size() / 6);
  for (size_t i = 0; i < runs.size(); ++i) {
    std::memcpy(&runs[i].class_id, bytes.data() + 6 * i, 2);
    std::memcpy(&runs[i].length, bytes.data() + 6 * i + 2, 4);
  }
  return runs;
}

inline ClassRaster rle_decode_runs(std::span<const Run> runs, ImageDims dims) {
  std::uint64_t total = 0;
  for (const Run& r : runs) total += r.length;
  const std::uint64_t expected = static_cast<std::uint64_t>(dims.width) * static_cast<std::uint64_t>(dims.height);
  if (total != expected)
    fail(ErrorCode::kLengthMismatch,
         "run lengths sum to " + std::to_string(total) + ", expected " + std::to_string(expected));
  ClassRaster raster;
  raster.width = dims.width;
  raster.height = dims.height;
  raster.data.reserve(expected);
  for (const Run& r : runs) raster.data.insert(raster.data.end(), r.length, r.class_id);
  return raster;
}

inline ClassRaster rle_decode(std::span<const std::uint8_t> bytes, ImageDims dims) {
  const auto runs = rle_parse(bytes);
  return rle_decode_runs(runs, dims);
}

}  // namespace cmr
