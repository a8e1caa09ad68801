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

#include <thread>

#include "cmr/service/http.hpp"
#include "cmr/service/service.hpp"

namespace {

using namespace cmr;
using namespace cmr::service;

AppConfig small_app() {
  AppConfig c;
  c.model.dim = 16;
  c.model.text_buckets = 256;
  c.model.text_hidden = 16;
  c.model.motion_hidden = 16;
  c.model.video_hidden = 16;
  c.model.fusion.projection_hidden = 32;
  return c;
}

struct Loaded {
  AppConfig cfg = small_app();
  std::shared_ptr<const embed::Model> model = std::make_shared<const embed::Model>(cfg.model);
  std::vector<SceneSample> samples = generate_synthetic(30, 5);
  RetrievalService svc{cfg};
  Loaded() {
    svc.set_model(model, "test-1");
    svc.set_index(std::make_shared<index::VectorIndex>(build_index(*model, samples)));
    for (const auto& s : samples) svc.add_scene(s);
  }
};

TEST(Service, QueryReturnsRankedResults) {
  Loaded l;
  const auto r = l.svc.query({{"text", "A person is walking on the road"}, {"top_n", 5}});
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body["results"].size(), 5u);
  for (size_t i = 1; i < 5; ++i) EXPECT_GE(r.body["results"][i - 1]["score"], r.body["results"][i]["score"]);
  EXPECT_TRUE(r.body["results"][0]["metadata"].contains("annotations"));
  EXPECT_GE(r.body["latency_ms"].get<double>(), 0.0);
  EXPECT_EQ(l.svc.query({{"text", "walking"}}).body["results"].size(), 10u);
}

TEST(Service, QueryIsDeterministic) {
  Loaded a, b;
  auto strip = [](json j) {
    j.erase("latency_ms");
    return j;
  };
  const json q = {{"text", "waving sidewalk"}, {"top_n", 7}};
  EXPECT_EQ(strip(a.svc.query(q).body).dump(), strip(b.svc.query(q).body).dump());
}

TEST(Service, QueryValidation) {
  Loaded l;
  EXPECT_EQ(l.svc.query({{"text", ""}}).status, 400);
  EXPECT_EQ(l.svc.query({{"text", "the a"}}).status, 400);
  EXPECT_EQ(l.svc.query({{"text", "walking"}, {"top_n", 0}}).status, 400);
  EXPECT_EQ(l.svc.query({{"text", "walking"}, {"top_n", 1001}}).status, 400);
  EXPECT_EQ(l.svc.query({{"text", "walking"}, {"top_n", "3"}}).status, 400);
  EXPECT_EQ(l.svc.query({{"top_n", 3}}).status, 400);
  EXPECT_EQ(l.svc.query(json::array()).status, 400);
  EXPECT_EQ(l.svc.query({{"text", ""}}).body["error"], "EmptyText");
}

TEST(Service, UnavailableWithoutIndexOrModel) {
  RetrievalService svc(small_app());
  EXPECT_EQ(svc.query({{"text", "walking"}}).status, 503);
  svc.set_model(std::make_shared<const embed::Model>(small_app().model), "v");
  EXPECT_EQ(svc.query({{"text", "walking"}}).status, 503);
  EXPECT_EQ(svc.query({{"text", "walking"}}).body["error"], "IndexNotLoaded");
}

TEST(Service, SceneLookup) {
  Loaded l;
  const auto& s = l.samples[3];
  const auto plain = l.svc.scene(s.id, false);
  ASSERT_EQ(plain.status, 200);
  EXPECT_EQ(plain.body["id"], s.id);
  EXPECT_FALSE(plain.body.contains("masks"));
  const auto full = l.svc.scene(s.id, true);
  ASSERT_TRUE(full.body.contains("masks"));
  const SceneSample back = manifest::sample_from_json(full.body, synthetic::ClassTables::defaults());
  ASSERT_TRUE(back.masks.has_value());
  EXPECT_EQ(back.masks->object_mask.data, s.masks->object_mask.data);
  EXPECT_EQ(back.masks->ground_mask.data, s.masks->ground_mask.data);
  EXPECT_EQ(l.svc.scene("missing", false).status, 404);
}

TEST(Service, HealthTransitions) {
  AppConfig cfg = small_app();
  RetrievalService svc(cfg);
  auto model = std::make_shared<const embed::Model>(cfg.model);
  svc.set_model(model, "m1");
  auto h = svc.health().body;
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["index_size"], 0);
  EXPECT_EQ(h["model_version"], "m1");
  for (auto s : generate_synthetic(100, 8)) {
    s.annotations = {};
    ASSERT_EQ(svc.ingest(manifest::to_json(s)).status, 201);
  }
  EXPECT_EQ(svc.health().body["index_size"], 100);
  svc.set_model(nullptr, "");
  h = svc.health().body;
  EXPECT_EQ(h["status"], "degraded");
  EXPECT_TRUE(h["model_version"].is_null());
}

TEST(Service, IngestStatuses) {
  Loaded l;
  SceneSample extra = generate_synthetic(1, 99, {}, "extra").front();
  const json rec = manifest::to_json(extra);
  const auto first = l.svc.ingest(rec);
  EXPECT_EQ(first.status, 201);
  EXPECT_EQ(first.body["index_size"], 31);
  EXPECT_EQ(l.svc.ingest(rec).status, 409);
  json broken = rec;
  broken.erase("joints");
  broken["id"] = "broken-0";
  EXPECT_EQ(l.svc.ingest(broken).status, 400);
  EXPECT_EQ(l.svc.scene("extra-0", false).status, 200);
  RetrievalService bare(small_app());
  EXPECT_EQ(bare.ingest(rec).status, 503);
}

TEST(Service, IngestAnnotatesWhenMissing) {
  Loaded l;
  SceneSample s = generate_synthetic(1, 17, {}, "fresh").front();
  const auto truth = s.annotations;
  s.annotations = {};
  ASSERT_EQ(l.svc.ingest(manifest::to_json(s)).status, 201);
  const auto got = l.svc.scene("fresh-0", false).body;
  EXPECT_FALSE(got["annotations"]["simple"].empty());
  EXPECT_EQ(got["annotations"]["simple"], manifest::to_json(truth)["simple"]);
}

TEST(Http, RoundTripOnEphemeralPort) {
  Loaded l;
  httplib::Server server;
  install_routes(server, l.svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  auto h = client.Get("/health");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);
  EXPECT_EQ(json::parse(h->body)["index_size"], 30);
  EXPECT_EQ(h->get_header_value("Access-Control-Allow-Origin"), "*");

  auto q = client.Post("/query", R"({"text":"A person is running on the road","top_n":3})", "application/json");
  ASSERT_TRUE(q);
  EXPECT_EQ(q->status, 200);
  EXPECT_EQ(json::parse(q->body)["results"].size(), 3u);

  auto bad = client.Post("/query", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto s = client.Get(("/scenes/" + l.samples[0].id + "?include=masks").c_str());
  ASSERT_TRUE(s);
  EXPECT_EQ(s->status, 200);
  EXPECT_TRUE(json::parse(s->body).contains("masks"));
  auto missing = client.Get("/scenes/nope");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  const std::string rec = manifest::to_json(generate_synthetic(1, 123, {}, "posted").front()).dump();
  auto p1 = client.Post("/scenes", rec, "application/json");
  ASSERT_TRUE(p1);
  EXPECT_EQ(p1->status, 201);
  auto p2 = client.Post("/scenes", rec, "application/json");
  ASSERT_TRUE(p2);
  EXPECT_EQ(p2->status, 409);

  auto pre = client.Options("/query");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);

  server.stop();
  t.join();
}

}  // namespace
