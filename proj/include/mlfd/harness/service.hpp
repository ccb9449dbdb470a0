// Copyright 2026 The mechanism-lfd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace httplib {
class Server;
}

namespace mlfd::harness {

struct Session;

/// Local HTTP+JSON backend for the sketching UI. One simulation session per
/// id; commands within a session are serialized, sessions run independently.
class Service {
 public:
  Service();
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds without serving. port 0 picks a free port. Throws BindError.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop(); blocks.
  void serve();
  /// bind() and serve() in a background thread; returns the port.
  int start(const std::string& host, int port);
  void stop();

 private:
  void install_routes();
  std::shared_ptr<Session> find_session(const std::string& id);

  std::unique_ptr<httplib::Server> server_;
  std::thread serve_thread_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  int next_session_ = 1;
};

}  // namespace mlfd::harness
