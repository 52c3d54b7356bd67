// Copyright 2026 The STEREO Authors.
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

#include "stereo/session_server.hpp"

#include <httplib.h>

namespace stereo::session {
namespace {

Response json_response(int status, const nlohmann::json& body) { return {status, body.dump(), "application/json"}; }

Response error(int status, const std::string& message, nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = message;
  return json_response(status, extra);
}

nlohmann::json parse_body(std::string_view body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("request body is not JSON: ") + e.what());
  }
}

nlohmann::json diagnostic_json(const RegexDiagnostic& d) { return {{"message", d.message}, {"position", d.position}}; }

}  // namespace

Response handle(Session& session, std::string_view method, std::string_view path, std::string_view body) {
  try {
    if (method == "GET" && path == "/session/next") {
      auto item = session.next_unclassified();
      if (!item) return json_response(200, {{"done", true}, {"metrics", to_json(session.metrics())}});
      nlohmann::json spans = nlohmann::json::array();
      for (const Span& s : item->uncovered) spans.push_back({{"start", s.start}, {"end", s.end}});
      return json_response(200, {{"done", false},
                                 {"sentence", item->sentence.text},
                                 {"uncovered", spans},
                                 {"doc_id", item->sentence.doc_id},
                                 {"index", item->sentence.index}});
    }
    if (method == "POST" && path == "/session/test") {
      auto report = session.test_proposal(proposal_from_json(parse_body(body)));
      return json_response(report.diagnostic ? 400 : 200, to_json(report));
    }
    if (method == "POST" && path == "/session/accept") {
      long version = session.accept_proposal(proposal_from_json(parse_body(body)));
      return json_response(200, {{"version", version}});
    }
    if (method == "POST" && path == "/session/skip") {
      auto j = parse_body(body);
      if (!j.is_object() || !j.contains("doc_id") || !j.contains("index")) {
        return error(400, "skip needs doc_id and index");
      }
      session.skip(j["doc_id"].get<std::string>(), j["index"].get<std::size_t>());
      return json_response(200, {{"skipped", true}});
    }
    if (method == "GET" && path == "/session/metrics") return json_response(200, to_json(session.metrics()));
    if (method == "GET" && path == "/rulesets") return json_response(200, rules::to_json(session.rulesets()));
    if (method == "GET" && path == "/rulesets/export") return {200, rules::serialize(session.rulesets()), "application/json"};
    return error(404, "no route for " + std::string(method) + " " + std::string(path));
  } catch (const Rejected& e) {
    return error(409, e.what(), {{"reason", e.reason()}});
  } catch (const InvalidProposal& e) {
    return error(400, e.what(), {{"diagnostic", diagnostic_json(e.diagnostic())}});
  } catch (const ParseError& e) {
    return error(400, e.what());
  } catch (const nlohmann::json::exception& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

struct Server::Impl {
  Session& session;
  httplib::Server http;

  explicit Impl(Session& s) : session(s) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      auto out = handle(session, req.method, req.path, req.body);
      res.status = out.status;
      if (req.path == "/rulesets/export" && out.status == 200) {
        res.set_header("Content-Disposition", "attachment; filename=\"rulesets.json\"");
      }
      res.set_content(out.body, out.content_type);
    };
    for (const char* p : {"/session/next", "/session/metrics", "/rulesets", "/rulesets/export"}) http.Get(p, route);
    for (const char* p : {"/session/test", "/session/accept", "/session/skip"}) http.Post(p, route);
  }
};

Server::Server(Session& session) : impl_(std::make_unique<Impl>(session)) {}
Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace stereo::session
