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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "cmr/core/base64.hpp"
#include "cmr/core/manifest.hpp"
#include "cmr/core/rle.hpp"
#include "cmr/core/synthetic.hpp"
#include "oracles/context_oracle.hpp"

namespace {

using namespace cmr;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cmr::Error thrown";
  return ErrorCode::kNotFound;
}

ClassRaster raster(int w, int h, std::vector<ClassId> values) {
  ClassRaster r(w, h);
  r.data = std::move(values);
  return r;
}

TEST(Rle, UniformRasterIsOneRun) {
  const auto runs = rle_runs(ClassRaster(2, 2, 7));
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0], (cmr::Run{7, 4}));
}

TEST(Rle, TwoRuns) {
  const auto runs = rle_runs(raster(2, 2, {1, 1, 2, 2}));
  EXPECT_EQ(runs, (std::vector<cmr::Run>{{1, 2}, {2, 2}}));
}

TEST(Rle, BinaryLayoutIsPackedLittleEndian) {
  const auto bytes = rle_encode(raster(4, 1, {0x0102, 0x0102, 0x0102, 5}));
  const std::vector<std::uint8_t> want = {0x02, 0x01, 3, 0, 0, 0, 5, 0, 1, 0, 0, 0};
  EXPECT_EQ(bytes, want);
}

TEST(Rle, DecodeUniform) {
  const std::vector<cmr::Run> runs = {{7, 4}};
  EXPECT_EQ(rle_decode_runs(runs, {2, 2}), ClassRaster(2, 2, 7));
}

TEST(Rle, DecodeLengthMismatch) {
  const std::vector<cmr::Run> runs = {{1, 3}};
  EXPECT_EQ(code_of([&] { rle_decode_runs(runs, {2, 2}); }), ErrorCode::kLengthMismatch);
}

TEST(Rle, OddByteCountIsCorrupt) {
  const std::vector<std::uint8_t> bytes(7, 0);
  EXPECT_EQ(code_of([&] { rle_decode(bytes, {1, 1}); }), ErrorCode::kCorruptFile);
}

TEST(Rle, EmptyRasterRejected) {
  EXPECT_EQ(code_of([] { rle_encode(ClassRaster{}); }), ErrorCode::kEmptyInput);
}

TEST(Rle, RandomRoundTrip64) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cls(0, 5);
  ClassRaster r(64, 64);
  for (auto& v : r.data) v = static_cast<ClassId>(cls(rng));
  EXPECT_EQ(rle_decode(rle_encode(r), r.dims()), r);
}

TEST(Rle, DecodeEncodeDecodeFixedPoint) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 17), h = 1 + static_cast<int>(rng() % 13);
    std::vector<cmr::Run> runs;
    std::uint32_t left = static_cast<std::uint32_t>(w * h);
    while (left > 0) {
      const std::uint32_t len = 1 + static_cast<std::uint32_t>(rng() % left);
      runs.push_back({static_cast<ClassId>(rng() % 4), len});
      left -= len;
    }
    const ClassRaster once = rle_decode_runs(runs, {w, h});
    const ClassRaster twice = rle_decode(rle_encode(once), {w, h});
    ASSERT_EQ(once, twice);
    // Adjacent equal-class runs merge, so the canonical form never grows.
    EXPECT_LE(rle_runs(twice).size(), runs.size());
  }
}

TEST(Base64, KnownVectors) {
  auto enc = [](std::string s) { return base64::encode(std::vector<std::uint8_t>(s.begin(), s.end())); };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
  const auto back = base64::decode("Zm9vYmE=");
  EXPECT_EQ(std::string(back.begin(), back.end()), "fooba");
}

TEST(Base64, RejectsMalformed) {
  EXPECT_EQ(code_of([] { base64::decode("abc"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { base64::decode("ab!d"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { base64::decode("a=bc"); }), ErrorCode::kParseError);
}

TEST(Base64, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  for (size_t n = 0; n < 40; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(base64::decode(base64::encode(bytes)), bytes);
  }
}

synthetic::SceneRecipe car_left_recipe() {
  synthetic::SceneRecipe r;
  r.persons.push_back({{180, 100, 220, 260}, motion::MotionFamily::kWalk});
  r.ground.push_back({"road", {0, 150, 400, 300}});
  r.ground.push_back({"crosswalk", {160, 240, 240, 300}});
  r.objects.push_back({"car", {150, 160, 180, 200}});
  r.declared = {{Relation::kOn, "crosswalk"}, {Relation::kNextTo, "car"}};
  return r;
}

TEST(Synthetic, CarLeftStripMatchesOracle) {
  const auto scene = synthetic::generate_synthetic_scene(car_left_recipe(), 1, "s0");
  const context::ContextConfig cfg;
  const auto labels = oracle::label_context(scene.sample.motion.boxes[kMiddleFrame], *scene.sample.masks, cfg);
  EXPECT_EQ(labels, scene.ground_truth.contexts);
  EXPECT_NE(std::find(labels.begin(), labels.end(), ContextLabel{Relation::kNextTo, "car"}), labels.end());
  EXPECT_NE(std::find(labels.begin(), labels.end(), ContextLabel{Relation::kOn, "crosswalk"}), labels.end());
  EXPECT_EQ(scene.ground_truth.motions, std::vector<std::string>{"walking"});
}

TEST(Synthetic, SameSeedSameBytes) {
  const auto a = synthetic::generate_synthetic_scene(car_left_recipe(), 42, "s0");
  const auto b = synthetic::generate_synthetic_scene(car_left_recipe(), 42, "s0");
  EXPECT_EQ(manifest::to_json(a.sample).dump(), manifest::to_json(b.sample).dump());
  const auto c = synthetic::generate_synthetic_scene(car_left_recipe(), 43, "s0");
  EXPECT_NE(manifest::to_json(a.sample).dump(), manifest::to_json(c.sample).dump());
}

TEST(Synthetic, RandomRecipesAreDeterministic) {
  synthetic::RandomSceneOptions opt;
  std::mt19937_64 r1(9), r2(9);
  for (int i = 0; i < 20; ++i) {
    const auto a = synthetic::random_recipe(r1, opt);
    const auto b = synthetic::random_recipe(r2, opt);
    ASSERT_EQ(a.declared, b.declared);
    ASSERT_EQ(a.persons.front().box, b.persons.front().box);
  }
}

TEST(Synthetic, OutOfBoundsRegionIsInvalidRecipe) {
  auto r = car_left_recipe();
  r.objects.push_back({"bus", {390, 10, 420, 40}});
  EXPECT_EQ(code_of([&] { synthetic::generate_synthetic_scene(r, 1, "x"); }), ErrorCode::kInvalidRecipe);
  auto none = car_left_recipe();
  none.persons.clear();
  EXPECT_EQ(code_of([&] { synthetic::generate_synthetic_scene(none, 1, "x"); }), ErrorCode::kInvalidRecipe);
  auto unknown = car_left_recipe();
  unknown.objects.push_back({"spaceship", {0, 0, 5, 5}});
  EXPECT_EQ(code_of([&] { synthetic::generate_synthetic_scene(unknown, 1, "x"); }), ErrorCode::kInvalidRecipe);
}

TEST(Manifest, RoundTripThroughFile) {
  const auto tables = synthetic::ClassTables::defaults();
  const auto scene = synthetic::generate_synthetic_scene(car_left_recipe(), 7, "scene-7", tables);
  SceneSample s = scene.sample;
  s.annotations = scene.ground_truth;
  const auto path = (std::filesystem::temp_directory_path() / "cmr_manifest_roundtrip.jsonl").string();
  manifest::write_manifest(path, {s, s});
  const auto back = manifest::read_manifest(path, tables);
  std::remove(path.c_str());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(manifest::to_json(back[0]).dump(), manifest::to_json(s).dump());
  EXPECT_EQ(back[1].masks->object_mask, s.masks->object_mask);
  EXPECT_EQ(back[1].annotations, s.annotations);
}

TEST(Manifest, MalformedRecordsAreParseErrors) {
  const auto tables = synthetic::ClassTables::defaults();
  EXPECT_EQ(code_of([&] { manifest::sample_from_json(nlohmann::json::object(), tables); }), ErrorCode::kParseError);
  auto j = manifest::to_json(synthetic::generate_synthetic_scene(car_left_recipe(), 1, "a").sample);
  j["joints"] = std::vector<double>(10, 0.0);
  EXPECT_EQ(code_of([&] { manifest::sample_from_json(j, tables); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([] { manifest::box_from_json(nlohmann::json::array({5, 5, 2, 9})); }), ErrorCode::kParseError);
}

TEST(ClassTableTest, LookupAndRequire) {
  const auto t = ClassTable::from_names({"unlabeled", "car"});
  EXPECT_EQ(t.name(1), "car");
  EXPECT_EQ(t.require("car"), 1);
  EXPECT_FALSE(t.id("bus").has_value());
  EXPECT_EQ(code_of([&] { t.require("bus"); }), ErrorCode::kNotFound);
}

TEST(Quaternion, AngleBetweenIgnoresSign) {
  const Quat a = Quat::from_axis_angle({0, 1, 0}, 0.3);
  EXPECT_NEAR(Quat::angle_between(a, -a), 0.0, 1e-7);
  EXPECT_NEAR(Quat::angle_between(a, Quat{}), 0.3, 1e-12);
}

}  // namespace
