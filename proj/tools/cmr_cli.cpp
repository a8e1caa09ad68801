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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmr/cmr.hpp"
#include "cmr/service/http.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cmr;

namespace {

bool is_validation(ErrorCode c) {
  switch (c) {
    case ErrorCode::kIo:
    case ErrorCode::kNonFiniteLoss: return false;
    default: return true;
  }
}

std::vector<int> parse_ks(const std::string& s) {
  std::vector<int> ks;
  std::stringstream in(s);
  for (std::string tok; std::getline(in, tok, ',');) {
    try {
      ks.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidConfig, "bad k value '" + tok + "'");
    }
  }
  return ks;
}

std::vector<SceneSample> read_samples(const std::string& path, const service::AppConfig& cfg) {
  return manifest::read_manifest(path, cfg.class_tables());
}

std::string model_version(const std::string& path) {
  return fs::path(path).filename().string() + "@" + std::to_string(fs::file_size(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"context-motion retrieval engine"};
  app.require_subcommand(1);
  std::string config_path;
  long long seed = -1;
  app.add_option("--config", config_path, "JSON config file (default: $CMR_CONFIG)");
  app.add_option("--seed", seed, "global seed override");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic manifest with ground truth");
  size_t gen_n = 10;
  std::string gen_out = "synthetic.jsonl";
  bool gen_balanced = false, gen_two = false;
  gen->add_option("--n", gen_n, "number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output manifest");
  gen->add_flag("--balanced", gen_balanced, "family x ground balanced toy layout");
  gen->add_flag("--two-person", gen_two, "two people per scene (balanced layout)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a manifest and copy it into a store directory");
  std::string ingest_in, ingest_store = "store";
  ingest->add_option("--manifest", ingest_in, "input manifest")->required();
  ingest->add_option("--store", ingest_store, "store directory");

  // annotate
  auto* annotate_cmd = app.add_subcommand("annotate", "run the motion and context pipelines");
  std::string ann_in, ann_out;
  annotate_cmd->add_option("--manifest", ann_in, "input manifest")->required();
  annotate_cmd->add_option("--out", ann_out, "annotated manifest")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train the embedding model");
  std::string tr_in, tr_out = "model.cmrm", tr_fusion, tr_loss;
  int tr_epochs = 0;
  train_cmd->add_option("--manifest", tr_in, "annotated training manifest")->required();
  train_cmd->add_option("--out", tr_out, "model file");
  train_cmd->add_option("--epochs", tr_epochs, "override epoch count");
  train_cmd->add_option("--fusion", tr_fusion, "concat | bilinear | attention");
  train_cmd->add_option("--loss", tr_loss, "cosine | soft_ce | infonce");

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "embed a manifest into a vectors JSONL file");
  std::string em_model, em_in, em_out = "vectors.jsonl";
  embed_cmd->add_option("--model", em_model, "model file")->required();
  embed_cmd->add_option("--manifest", em_in, "manifest")->required();
  embed_cmd->add_option("--out", em_out, "vectors JSONL");

  // index
  auto* index_cmd = app.add_subcommand("index", "build a persistent index from vectors");
  std::string ix_in, ix_out = "index.cmix";
  index_cmd->add_option("--vectors", ix_in, "vectors JSONL")->required();
  index_cmd->add_option("--out", ix_out, "index file");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  std::string sv_model, sv_index, sv_manifest;
  int sv_port = 0;
  serve_cmd->add_option("--model", sv_model, "model file");
  serve_cmd->add_option("--index", sv_index, "index file");
  serve_cmd->add_option("--manifest", sv_manifest, "scene manifest for /scenes");
  serve_cmd->add_option("--port", sv_port, "port (default $CMR_PORT or 8080)");

  // query
  auto* query_cmd = app.add_subcommand("query", "one-shot text query");
  std::string q_model, q_index, q_text;
  int q_top = 10;
  query_cmd->add_option("--model", q_model, "model file")->required();
  query_cmd->add_option("--index", q_index, "index file")->required();
  query_cmd->add_option("--text", q_text, "query text")->required();
  query_cmd->add_option("--top-n", q_top, "number of results");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "top-k accuracy report");
  std::string ev_model, ev_split, ev_index, ev_protocol = "label", ev_ks = "1,2,3,5";
  eval_cmd->add_option("--model", ev_model, "model file")->required();
  eval_cmd->add_option("--split", ev_split, "annotated manifest to evaluate")->required();
  eval_cmd->add_option("--index", ev_index, "index file (recall protocol)");
  eval_cmd->add_option("--protocol", ev_protocol, "label | recall")->check(CLI::IsMember({"label", "recall"}));
  eval_cmd->add_option("--ks", ev_ks, "comma-separated k values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (config_path.empty())
      if (const char* env = std::getenv("CMR_CONFIG")) config_path = env;
    service::AppConfig cfg = config_path.empty() ? service::AppConfig{} : service::load_config(config_path);
    if (seed >= 0) {
      cfg.seed = static_cast<std::uint64_t>(seed);
      cfg.train.seed = cfg.seed;
      cfg.model.seed = cfg.seed;
    }

    if (*gen) {
      std::vector<SceneSample> samples;
      if (gen_balanced || gen_two) {
        service::ToyOptions o;
        o.n_train = gen_n;
        o.n_test = 0;
        o.seed = cfg.seed;
        o.two_person = gen_two;
        samples = service::make_toy_dataset(o).train;
      } else {
        samples = service::generate_synthetic(gen_n, cfg.seed);
      }
      // Ground truth only: `annotate` fills the annotations.
      for (auto& s : samples) s.annotations = {};
      manifest::write_manifest(gen_out, samples);
      std::printf("wrote %zu scenes to %s\n", samples.size(), gen_out.c_str());
    } else if (*ingest) {
      const auto samples = read_samples(ingest_in, cfg);
      fs::create_directories(ingest_store);
      const std::string out = (fs::path(ingest_store) / "manifest.jsonl").string();
      manifest::write_manifest(out, samples);
      std::printf("ingested %zu scenes into %s\n", samples.size(), out.c_str());
    } else if (*annotate_cmd) {
      auto samples = read_samples(ann_in, cfg);
      const service::Annotator annotator(cfg);
      size_t with_truth = 0, agree = 0;
      for (auto& s : samples) {
        annotator.annotate(s);
        if (s.ground_truth) {
          ++with_truth;
          agree += s.annotations == *s.ground_truth;
        }
      }
      manifest::write_manifest(ann_out, samples);
      std::printf("annotated %zu scenes", samples.size());
      if (with_truth) std::printf("; %zu/%zu match ground truth", agree, with_truth);
      std::printf("\n");
    } else if (*train_cmd) {
      const auto samples = read_samples(tr_in, cfg);
      if (tr_epochs > 0) cfg.train.epochs = tr_epochs;
      if (!tr_fusion.empty()) cfg.model.fusion.strategy = embed::parse_fusion(tr_fusion);
      if (!tr_loss.empty()) cfg.loss.kind = embed::parse_loss(tr_loss);
      cfg.validate();
      embed::Model model(cfg.model);
      const auto data = service::training_examples(samples, cfg.model.video);
      const auto history = embed::train(model, data, cfg.loss, cfg.train);
      for (size_t e = 0; e < history.epoch_loss.size(); ++e) std::printf("epoch %3zu  loss %.6f\n", e, history.epoch_loss[e]);
      model.save(tr_out);
      std::printf("saved model to %s\n", tr_out.c_str());
    } else if (*embed_cmd) {
      const auto model = embed::Model::load(em_model);
      const auto samples = read_samples(em_in, cfg);
      std::vector<json> rows;
      for (const auto& s : samples) {
        const auto v = model.encode_scene(embed::make_input(s, model.config().video));
        rows.push_back({{"id", s.id}, {"vector", std::vector<double>(v.data(), v.data() + v.size())},
                        {"metadata", service::scene_metadata(s)}});
      }
      manifest::write_jsonl(em_out, rows);
      std::printf("embedded %zu scenes to %s\n", rows.size(), em_out.c_str());
    } else if (*index_cmd) {
      const auto rows = manifest::read_jsonl(ix_in);
      if (rows.empty()) fail(ErrorCode::kEmptyInput, "no vectors in '" + ix_in + "'");
      try {
        index::VectorIndex idx(static_cast<std::uint32_t>(rows.front().at("vector").size()));
        for (const auto& r : rows)
          idx.insert(r.at("id").get<std::string>(), r.at("vector").get<std::vector<double>>(), r.value("metadata", json::object()));
        idx.persist(ix_out);
        std::printf("indexed %zu vectors into %s\n", idx.size(), ix_out.c_str());
      } catch (const json::exception& e) {
        fail(ErrorCode::kParseError, std::string("bad vectors file: ") + e.what());
      }
    } else if (*serve_cmd) {
      if (sv_model.empty()) sv_model = cfg.service.model_path;
      if (sv_index.empty()) sv_index = cfg.service.index_path;
      if (sv_manifest.empty()) sv_manifest = cfg.service.manifest_path;
      int port = cfg.service.port;
      if (const char* env = std::getenv("CMR_PORT")) port = std::atoi(env);
      if (sv_port > 0) port = sv_port;
      service::RetrievalService svc(cfg);
      if (!sv_model.empty()) svc.set_model(std::make_shared<const embed::Model>(embed::Model::load(sv_model)), model_version(sv_model));
      if (!sv_index.empty()) svc.set_index(std::make_shared<index::VectorIndex>(index::VectorIndex::load(sv_index)));
      if (!sv_manifest.empty())
        for (auto& s : read_samples(sv_manifest, cfg)) svc.add_scene(std::move(s));
      httplib::Server server;
      service::install_routes(server, svc);
      std::printf("listening on %s:%d\n", cfg.service.host.c_str(), port);
      std::fflush(stdout);
      if (!server.listen(cfg.service.host, port)) fail(ErrorCode::kIo, "cannot bind port " + std::to_string(port));
    } else if (*query_cmd) {
      service::RetrievalService svc(cfg);
      svc.set_model(std::make_shared<const embed::Model>(embed::Model::load(q_model)), model_version(q_model));
      svc.set_index(std::make_shared<index::VectorIndex>(index::VectorIndex::load(q_index)));
      const auto r = svc.query({{"text", q_text}, {"top_n", q_top}});
      std::cout << r.body.dump(2) << '\n';
      if (r.status != 200) return r.status == 400 ? 2 : 1;
    } else if (*eval_cmd) {
      const auto model = embed::Model::load(ev_model);
      const auto samples = read_samples(ev_split, cfg);
      const auto ks = parse_ks(ev_ks);
      eval::EvalReport report;
      if (ev_protocol == "label") {
        std::vector<std::vector<std::string>> truths;
        for (const auto& s : samples) truths.push_back(service::valid_labels(s.annotations));
        report = eval::topk_label_accuracy(model, service::model_inputs(samples, model.config().video), truths,
                                           service::candidate_labels(samples), ks);
      } else {
        if (ev_index.empty()) fail(ErrorCode::kInvalidConfig, "--index is required for the recall protocol");
        const auto idx = index::VectorIndex::load(ev_index);
        std::vector<eval::RecallQuery> queries;
        for (const auto& s : samples) queries.push_back({s.id, service::first_annotation(s.annotations)});
        report = eval::recall_at_k(model, idx, queries, ks);
      }
      std::cout << eval::format_table(report) << eval::to_json(report).dump() << '\n';
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return is_validation(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
