// Copyright 2026 The Cascade Reward Authors
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
#include <thread>

#include "cascade/service/reward_service.hpp"

namespace httplib {
class Server;
}

namespace cascade::service {

/// POST /v1/reward, GET /v1/stats, GET /healthz over a RewardService.
class HttpServer {
 public:
  explicit HttpServer(RewardService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Blocks until stop(). Port 0 binds any free port.
  void listen(const std::string& host, int port);

  /// Binds and serves on a background thread; returns the bound port.
  int start(const std::string& host, int port = 0);
  void stop();

 private:
  RewardService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace cascade::service
