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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cascade/core/cascade.hpp"
#include "cascade/service/config.hpp"
#include "json.hpp"

namespace cascade::service {

/// Malformed request body (maps to HTTP 400).
class RequestError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RewardItem {
  std::string request_id;
  std::string context;
  Candidate candidate;
  std::vector<Candidate> references;
};

struct RewardOptions {
  bool force_judge = false;
  std::optional<CascadeParams> params_override;
};

/// {"items":[{request_id, context, candidate, references}], "options":{force_judge, params_override}}
struct RewardRequest {
  std::vector<RewardItem> items;
  RewardOptions options;

  static RewardRequest from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

struct ItemError {
  std::string kind;  // backend | scoring | invalid
  std::string message;
  std::optional<Region> region;
};

struct ItemResult {
  std::string request_id;
  std::optional<RoutingOutcome> outcome;  // absent iff error is set
  std::optional<ItemError> error;
  bool cache_hit = false;
};

struct BatchStats {
  double fast_pass_fraction = 0.0;  // over scored reply items
  double wall_time_s = 0.0;
  std::map<std::string, double> backend_time_by_name;
};

struct RewardResponse {
  std::vector<ItemResult> items;  // request order
  BatchStats batch_stats;

  nlohmann::ordered_json to_json() const;
};

/// Cumulative service counters.
struct ServiceStats {
  std::uint64_t items = 0;
  std::uint64_t errors = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_lookups = 0;
  std::uint64_t action_mismatch = 0;
  std::uint64_t tool_exact_match = 0;
  std::map<Region, std::uint64_t> regions;  // scored reply items, cache misses and hits
  std::map<std::string, judge::CallCounters> backends;
  double reranker_weight = 1.0;
  double judge_weight = 10.0;

  std::uint64_t scored_replies() const;
  double fast_pass_fraction() const;
  double cache_hit_rate() const;
  /// fast_pass_count * judge latency weight.
  double estimated_judge_time_saved() const;
  /// Cascade reward time over judge-always reward time under the latency weights.
  double estimated_time_ratio() const;

  nlohmann::ordered_json to_json() const;
};

/// Content-addressed digest of everything that can change a reward.
std::string cache_key(const RewardItem& item, const CascadeParams& params, const std::string& backend_fingerprint,
                      bool force_judge);

/// In-process reward cache, optionally persisted as append-only JSONL.
class RewardCache {
 public:
  explicit RewardCache(std::optional<std::filesystem::path> path = std::nullopt);
  std::optional<RoutingOutcome> get(const std::string& key) const;
  void put(const std::string& key, const RoutingOutcome& outcome);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, RoutingOutcome> entries_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
};

class RewardService {
 public:
  /// `params` may be empty, in which case every request must carry params_override.
  RewardService(std::shared_ptr<BackendSet> backends, std::optional<CascadeParams> params,
                std::optional<std::filesystem::path> cache_path = std::nullopt, unsigned item_workers = 0);

  /// Loads params from config.params or config.params_path (calibration artifact).
  static std::unique_ptr<RewardService> from_config(const ServiceConfig& config);

  /// Throws RequestError when no params are available.
  RewardResponse handle_batch(const RewardRequest& request);

  ServiceStats stats_snapshot() const;

  const BackendSet& backends() const { return *backends_; }
  const std::optional<CascadeParams>& params() const { return params_; }

 private:
  ItemResult score_item(const RewardItem& item, const CascadeParams& params, bool force_judge);

  std::shared_ptr<BackendSet> backends_;
  std::optional<CascadeParams> params_;
  RewardCache cache_;
  unsigned item_workers_;
  std::string backend_fingerprint_;

  std::atomic<std::uint64_t> items_{0}, errors_{0}, hits_{0}, lookups_{0}, mismatch_{0}, tools_{0};
  std::atomic<std::uint64_t> mix_low_{0}, fast_{0}, mix_high_{0};
};

}  // namespace cascade::service
