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

#include <chrono>
#include <regex>

#include "cascade/judge/backend.hpp"
#include "httplib.h"

namespace cascade::judge {
namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& name, const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw BackendError(BackendErrorKind::transport, name, "not an http(s) endpoint: " + url);
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

class HttpTransport final : public Transport {
 public:
  std::string post(const BackendDescriptor& backend, const std::string& body) override {
    const Endpoint ep = split_endpoint(backend.name, backend.endpoint);
    httplib::Client client(ep.base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(backend.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(backend.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!backend.auth_token.empty()) headers.emplace("Authorization", "Bearer " + backend.auth_token);

    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read &&
                              std::chrono::steady_clock::now() - start >= backend.timeout);
      throw BackendError(timed_out ? BackendErrorKind::timeout : BackendErrorKind::transport,
                         backend.name, httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300) {
      throw BackendError(BackendErrorKind::transport, backend.name,
                         "HTTP " + std::to_string(res->status));
    }
    return res->body;
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttpTransport>(); }

}  // namespace cascade::judge
