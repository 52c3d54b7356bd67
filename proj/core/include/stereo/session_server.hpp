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

#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "stereo/session.hpp"

namespace stereo::session {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-independent request dispatch for the session API:
//   GET  /session/next      GET /session/metrics
//   POST /session/test      POST /session/accept     POST /session/skip
//   GET  /rulesets          GET /rulesets/export
Response handle(Session& session, std::string_view method, std::string_view path, std::string_view body);

// HTTP front end for a Session.
class Server {
 public:
  explicit Server(Session& session);
  ~Server();

  // Binds the listening socket; port 0 picks a free port. Returns the bound
  // port. Throws ConfigError when the address cannot be bound.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stereo::session
