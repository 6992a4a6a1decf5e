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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cascade/core/cascade.hpp"
#include "cascade/judge/backend.hpp"
#include "cascade/judge/prompts.hpp"
#include "json.hpp"

namespace cascade::service {

/// One backend entry of the config file:
/// {"endpoint", "mode"?, "timeout_ms"?, "max_in_flight"?, "latency_weight"?,
///  "auth_token_env"?, "prompt_template"?, "mock"?: {"kind": ...}}
/// An endpoint "mock://<kind>" selects an in-process mock; "mock" gives its
/// full spec. Env vars CASCADE_<NAME>_ENDPOINT and CASCADE_<NAME>_TOKEN
/// override endpoint and token, NAME being the upper-cased entry name.
struct BackendSpec {
  judge::BackendDescriptor descriptor;
  nlohmann::ordered_json mock;  // null unless the endpoint is mock://
};

/// Structured service configuration (JSON file).
///   backends.reranker, backends.judge: single backends
///   backends.consistency: list (teacher ensemble), backends.utility: single
///   params_path | params, cache_path, item_workers, retry, listen {host, port}
struct ServiceConfig {
  std::optional<BackendSpec> reranker;
  std::optional<BackendSpec> judge;
  std::vector<BackendSpec> consistency;
  std::optional<BackendSpec> utility;
  judge::RetryPolicy retry;
  std::optional<std::filesystem::path> params_path;
  std::optional<CascadeParams> params;
  std::optional<std::filesystem::path> cache_path;
  unsigned item_workers = 0;  // 0 = hardware concurrency
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path base_dir;     // relative paths resolve against this
  std::filesystem::path prompts_dir;  // defaults to the shipped assets

  static ServiceConfig from_json(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir = {});
  static ServiceConfig load(const std::filesystem::path& path);

  /// All-mock configuration: lexical reranker, judge, four-member lexical
  /// consistency ensemble and utility judge.
  static ServiceConfig mock_defaults();
};

BackendSpec backend_spec_from_json(const std::string& name, const nlohmann::ordered_json& j,
                                   judge::BackendMode default_mode, double default_weight);

/// Live clients for a config, sharing one call ledger.
class BackendSet {
 public:
  explicit BackendSet(const ServiceConfig& config);

  const judge::BackendClient& reranker() const;
  const judge::BackendClient& judge() const;
  const judge::BackendClient& utility() const;
  std::vector<const judge::BackendClient*> consistency() const;

  bool has_reranker() const { return reranker_ != nullptr; }
  bool has_judge() const { return judge_ != nullptr; }

  const judge::CallLedger& ledger() const { return *ledger_; }
  std::shared_ptr<judge::CallLedger> ledger_ptr() const { return ledger_; }

  /// Fingerprint of the reranker and judge descriptors (cache-key input).
  std::string scoring_fingerprint() const;

  /// Latency weight per backend name.
  std::map<std::string, double> latency_weights() const;

 private:
  std::unique_ptr<judge::BackendClient> make(const BackendSpec& spec) const;

  std::filesystem::path base_dir_;
  std::string mock_fingerprint_;
  judge::RetryPolicy retry_;
  std::shared_ptr<judge::CallLedger> ledger_;
  std::shared_ptr<const judge::PromptLibrary> prompts_;
  std::shared_ptr<judge::Transport> http_;
  std::unique_ptr<judge::BackendClient> reranker_;
  std::unique_ptr<judge::BackendClient> judge_;
  std::unique_ptr<judge::BackendClient> utility_;
  std::vector<std::unique_ptr<judge::BackendClient>> consistency_;
};

}  // namespace cascade::service
