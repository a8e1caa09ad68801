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

#include <string>

#include <nlohmann/json.hpp>

// Before httplib: <resolv.h> defines an `_res` macro that collides with Eigen.
#include "cmr/service/service.hpp"

#include <httplib.h>

namespace cmr::service {

inline void write(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

/// Routes /query, /scenes, /scenes/{id} and /health onto `svc`, with CORS
/// headers on every response.
inline void install_routes(httplib::Server& server, RetrievalService& svc) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  auto parse = [](const httplib::Request& req, json& out) {
    try {
      out = json::parse(req.body);
      return true;
    } catch (const json::parse_error&) {
      return false;
    }
  };

  server.Post("/query", [&svc, parse](const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!parse(req, body)) return write(res, error_response(400, "ParseError", "request body is not valid JSON"));
    write(res, svc.query(body));
  });
  server.Get(R"(/scenes/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    const bool masks = req.has_param("include") && req.get_param_value("include") == "masks";
    write(res, svc.scene(req.matches[1], masks));
  });
  server.Post("/scenes", [&svc, parse](const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!parse(req, body)) return write(res, error_response(400, "ParseError", "request body is not valid JSON"));
    write(res, svc.ingest(body));
  });
  server.Get("/health", [&svc](const httplib::Request&, httplib::Response& res) { write(res, svc.health()); });
}

}  // namespace cmr::service
