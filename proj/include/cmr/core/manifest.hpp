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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmr/core/base64.hpp"
#include "cmr/core/rle.hpp"
#include "cmr/core/synthetic.hpp"
#include "cmr/core/types.hpp"
#include "cmr/error.hpp"

namespace cmr::manifest {

using nlohmann::json;

inline json to_json(const BBox& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

inline BBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) fail(ErrorCode::kParseError, "box must be [x0, y0, x1, y1]");
  BBox b{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
  if (!b.valid()) fail(ErrorCode::kParseError, "box must have x1 > x0 >= 0 and y1 > y0 >= 0");
  return b;
}

inline json to_json(const ContextLabel& c) { return {{"relation", relation_name(c.relation)}, {"class", c.class_name}}; }

inline ContextLabel context_from_json(const json& j) {
  return {parse_relation(j.at("relation").get<std::string>()), j.at("class").get<std::string>()};
}

inline json to_json(const AnnotationSet& a) {
  json contexts = json::array();
  for (const auto& c : a.contexts) contexts.push_back(to_json(c));
  return {{"motions", a.motions}, {"contexts", contexts}, {"simple", a.simple}, {"sentences", a.sentences}};
}

inline AnnotationSet annotations_from_json(const json& j) {
  AnnotationSet a;
  a.motions = j.value("motions", std::vector<std::string>{});
  for (const auto& c : j.value("contexts", json::array())) a.contexts.push_back(context_from_json(c));
  a.simple = j.value("simple", std::vector<std::string>{});
  a.sentences = j.value("sentences", std::vector<std::string>{});
  return a;
}

inline std::vector<double> flatten_joints(const std::vector<Pose>& frames) {
  std::vector<double> flat;
  flat.reserve(frames.size() * kNumJoints * 3);
  for (const Pose& p : frames)
    for (const Vec3& v : p) {
      flat.push_back(v.x);
      flat.push_back(v.y);
      flat.push_back(v.z);
    }
  return flat;
}

inline Pose pose_from_flat(const std::vector<double>& flat, size_t offset) {
  Pose p;
  for (int j = 0; j < kNumJoints; ++j) p[j] = {flat[offset + 3 * j], flat[offset + 3 * j + 1], flat[offset + 3 * j + 2]};
  return p;
}

inline json masks_to_json(const SegmentationMaskPair& m) {
  return {{"encoding", "rle-u16-u32-base64"},
          {"object", base64::encode(rle_encode(m.object_mask))},
          {"ground", base64::encode(rle_encode(m.ground_mask))}};
}

inline SegmentationMaskPair masks_from_json(const json& j, ImageDims dims, const synthetic::ClassTables& tables) {
  SegmentationMaskPair m;
  m.object_mask = rle_decode(base64::decode(j.at("object").get<std::string>()), dims);
  m.ground_mask = rle_decode(base64::decode(j.at("ground").get<std::string>()), dims);
  m.object_classes = tables.object;
  m.ground_classes = tables.ground;
  m.validate(dims);
  return m;
}

/// One manifest line. Masks are included unless `include_masks` is false.
inline json to_json(const SceneSample& s, bool include_masks = true) {
  json boxes = json::array();
  for (const auto& b : s.motion.boxes) boxes.push_back(to_json(b));
  std::vector<double> quats;
  for (const auto& q : s.motion.root_orientation)
    for (double c : q.components()) quats.push_back(c);
  json j = {{"id", s.id},
            {"image_dims", {s.image_dims.width, s.image_dims.height}},
            {"track_id", s.motion.track_id},
            {"frame_rate_hz", s.motion.frame_rate_hz},
            {"joints", flatten_joints(s.motion.frames)},
            {"root_orientation", quats},
            {"boxes", boxes},
            {"frame_refs", s.frame_refs},
            {"annotations", to_json(s.annotations)}};
  if (include_masks && s.masks) j["masks"] = masks_to_json(*s.masks);
  if (s.ground_truth) j["ground_truth"] = to_json(*s.ground_truth);
  return j;
}

inline SceneSample sample_from_json(const json& j, const synthetic::ClassTables& tables) {
  try {
    SceneSample s;
    s.id = j.at("id").get<std::string>();
    if (s.id.empty()) fail(ErrorCode::kParseError, "sample id must not be empty");
    const auto dims = j.at("image_dims");
    s.image_dims = {dims.at(0).get<int>(), dims.at(1).get<int>()};
    s.motion.track_id = j.value("track_id", s.id);
    s.motion.frame_rate_hz = j.value("frame_rate_hz", kFrameRateHz);
    const auto joints = j.at("joints").get<std::vector<double>>();
    const auto quats = j.at("root_orientation").get<std::vector<double>>();
    if (joints.size() != static_cast<size_t>(kSequenceLength * kNumJoints * 3))
      fail(ErrorCode::kShapeMismatch, "joints must hold 20 x 24 x 3 values");
    if (quats.size() != static_cast<size_t>(kSequenceLength * 4))
      fail(ErrorCode::kShapeMismatch, "root_orientation must hold 20 x 4 values");
    for (int t = 0; t < kSequenceLength; ++t) {
      s.motion.frames.push_back(pose_from_flat(joints, static_cast<size_t>(t) * kNumJoints * 3));
      s.motion.root_orientation.push_back({quats[4 * t], quats[4 * t + 1], quats[4 * t + 2], quats[4 * t + 3]});
    }
    for (const auto& b : j.at("boxes")) s.motion.boxes.push_back(box_from_json(b));
    s.motion.validate();
    s.frame_refs = j.value("frame_refs", std::vector<std::string>{});
    if (j.contains("masks")) s.masks = masks_from_json(j.at("masks"), s.image_dims, tables);
    if (j.contains("annotations")) s.annotations = annotations_from_json(j.at("annotations"));
    if (j.contains("ground_truth")) s.ground_truth = annotations_from_json(j.at("ground_truth"));
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("malformed manifest record: ") + e.what());
  }
}

inline std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::vector<json> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::kParseError, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

inline void write_jsonl(const std::string& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path + "'");
  for (const auto& r : rows) out << r.dump() << '\n';
}

inline std::vector<SceneSample> read_manifest(const std::string& path, const synthetic::ClassTables& tables) {
  std::vector<SceneSample> out;
  for (const auto& row : read_jsonl(path)) out.push_back(sample_from_json(row, tables));
  return out;
}

inline void write_manifest(const std::string& path, const std::vector<SceneSample>& samples) {
  std::vector<json> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(to_json(s));
  write_jsonl(path, rows);
}

}  // namespace cmr::manifest
