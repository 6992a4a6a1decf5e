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

#include "cascade/service/http_server.hpp"

#include <stdexcept>

#include "httplib.h"

namespace cascade::service {

using nlohmann::ordered_json;

namespace {

void reply_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(RewardService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/v1/reward", [this](const httplib::Request& req, httplib::Response& res) {
    ordered_json body;
    try {
      body = ordered_json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      reply_json(res, 400, {{"error", {{"kind", "malformed_body"}, {"message", e.what()}}}});
      return;
    }
    try {
      const RewardRequest request = RewardRequest::from_json(body);
      reply_json(res, 200, service_.handle_batch(request).to_json());
    } catch (const RequestError& e) {
      reply_json(res, 400, {{"error", {{"kind", "invalid_request"}, {"message", e.what()}}}});
    } catch (const std::exception& e) {
      reply_json(res, 500, {{"error", {{"kind", "internal"}, {"message", e.what()}}}});
    }
  });
  server_->Get("/v1/stats", [this](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, service_.stats_snapshot().to_json());
  });
  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, {{"status", "ok"}});
  });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace cascade::service
