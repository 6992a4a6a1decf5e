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

#include "cascade/service/reward_service.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <thread>

#include "cascade/calibrator/calibrate.hpp"
#include "cascade/io/digest.hpp"
#include "cascade/io/errors.hpp"
#include "cascade/io/jsonl.hpp"
#include "cascade/judge/errors.hpp"

namespace cascade::service {

using nlohmann::ordered_json;

namespace {

ordered_json candidate_wire(const ordered_json& e) {
  ordered_json c;
  for (const char* k : {"kind", "text", "tool_call"}) {
    if (auto it = e.find(k); it != e.end()) c[k] = *it;
  }
  return c;
}

ordered_json outcome_json(const RoutingOutcome& o) {
  ordered_json j;
  j["reward"] = o.reward.value();
  j["path"] = std::string(to_string(o.path));
  j["region"] = o.path == ScoringPath::cascade ? ordered_json(std::string(to_string(o.region))) : ordered_json();
  j["judge_invoked"] = o.judge_invoked;
  return j;
}

RoutingOutcome outcome_from_json(const ordered_json& j) {
  RoutingOutcome o;
  const std::string path = j.at("path").get<std::string>();
  o.path = path == "action_mismatch"    ? ScoringPath::action_mismatch
           : path == "tool_exact_match" ? ScoringPath::tool_exact_match
                                        : ScoringPath::cascade;
  if (j.contains("region") && j.at("region").is_string()) o.region = region_from_string(j.at("region").get<std::string>());
  o.reward = Score::of(j.at("reward").get<double>());
  o.judge_invoked = j.at("judge_invoked").get<bool>();
  return o;
}

}  // namespace

RewardRequest RewardRequest::from_json(const ordered_json& j) {
  try {
    if (!j.is_object()) throw RequestError("request body must be a JSON object");
    auto items = j.find("items");
    if (items == j.end() || !items->is_array()) throw RequestError("request needs an \"items\" array");
    RewardRequest req;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < items->size(); ++i) {
      const auto& it = (*items)[i];
      if (!it.is_object()) throw RequestError("item " + std::to_string(i) + " is not an object");
      auto id = it.find("request_id");
      if (id == it.end() || !(id->is_string() || id->is_number_integer())) {
        throw RequestError("item " + std::to_string(i) + " needs a request_id");
      }
      RewardItem item{id->is_string() ? id->get<std::string>() : id->dump(), it.value("context", std::string()),
                      Candidate::from_json(candidate_wire(it.at("candidate"))), {}};
      if (!ids.insert(item.request_id).second) throw RequestError("duplicate request_id " + item.request_id);
      auto refs = it.find("references");
      if (refs == it.end() || !refs->is_array() || refs->empty()) {
        throw RequestError("item " + item.request_id + " needs a non-empty references array");
      }
      for (const auto& r : *refs) item.references.push_back(Candidate::from_json(candidate_wire(r)));
      req.items.push_back(std::move(item));
    }
    if (auto opt = j.find("options"); opt != j.end() && !opt->is_null()) {
      if (!opt->is_object()) throw RequestError("\"options\" must be an object");
      req.options.force_judge = opt->value("force_judge", false);
      if (auto p = opt->find("params_override"); p != opt->end() && !p->is_null()) {
        req.options.params_override = calibrator::params_from_json(*p);
      }
    }
    return req;
  } catch (const RequestError&) {
    throw;
  } catch (const std::exception& e) {
    throw RequestError(e.what());
  }
}

ordered_json RewardRequest::to_json() const {
  ordered_json items_j = ordered_json::array();
  for (const auto& it : items) {
    ordered_json refs = ordered_json::array();
    for (const auto& r : it.references) refs.push_back(r.to_json());
    items_j.push_back({{"request_id", it.request_id},
                       {"context", it.context},
                       {"candidate", it.candidate.to_json()},
                       {"references", refs}});
  }
  ordered_json opts = {{"force_judge", options.force_judge}};
  if (options.params_override) opts["params_override"] = calibrator::params_to_json(*options.params_override);
  return {{"items", items_j}, {"options", opts}};
}

ordered_json RewardResponse::to_json() const {
  ordered_json items_j = ordered_json::array();
  for (const auto& r : items) {
    ordered_json e = {{"request_id", r.request_id}};
    if (r.outcome) {
      e.update(outcome_json(*r.outcome));
      e["cache_hit"] = r.cache_hit;
    } else {
      ordered_json err = {{"kind", r.error->kind}, {"message", r.error->message}};
      if (r.error->region) err["region"] = std::string(to_string(*r.error->region));
      e["error"] = err;
    }
    items_j.push_back(std::move(e));
  }
  ordered_json by_name = ordered_json::object();
  for (const auto& [k, v] : batch_stats.backend_time_by_name) by_name[k] = v;
  return {{"items", items_j},
          {"batch_stats",
           {{"fast_pass_fraction", batch_stats.fast_pass_fraction},
            {"wall_time_s", batch_stats.wall_time_s},
            {"backend_time_by_name", by_name}}}};
}

std::uint64_t ServiceStats::scored_replies() const {
  std::uint64_t n = 0;
  for (const auto& [_, c] : regions) n += c;
  return n;
}

double ServiceStats::fast_pass_fraction() const {
  const auto n = scored_replies();
  auto it = regions.find(Region::fast_pass);
  return n && it != regions.end() ? static_cast<double>(it->second) / static_cast<double>(n) : 0.0;
}

double ServiceStats::cache_hit_rate() const {
  return cache_lookups ? static_cast<double>(cache_hits) / static_cast<double>(cache_lookups) : 0.0;
}

double ServiceStats::estimated_judge_time_saved() const {
  auto it = regions.find(Region::fast_pass);
  return it == regions.end() ? 0.0 : static_cast<double>(it->second) * judge_weight;
}

double ServiceStats::estimated_time_ratio() const {
  const auto n = scored_replies();
  if (!n) return 1.0;
  const double fast = fast_pass_fraction();
  return ((1.0 - fast) * (reranker_weight + judge_weight) + fast * reranker_weight) / (reranker_weight + judge_weight);
}

ordered_json ServiceStats::to_json() const {
  ordered_json r = ordered_json::object();
  for (Region g : {Region::mix_low, Region::fast_pass, Region::mix_high}) {
    auto it = regions.find(g);
    r[std::string(to_string(g))] = it == regions.end() ? 0 : it->second;
  }
  ordered_json b = ordered_json::object();
  for (const auto& [name, c] : backends) {
    b[name] = {{"calls", c.calls}, {"failures", c.failures}, {"total_latency_s", c.total_latency_s}};
  }
  return {{"items", items},
          {"errors", errors},
          {"action_mismatch", action_mismatch},
          {"tool_exact_match", tool_exact_match},
          {"regions", r},
          {"scored_replies", scored_replies()},
          {"fast_pass_fraction", fast_pass_fraction()},
          {"cache_hits", cache_hits},
          {"cache_lookups", cache_lookups},
          {"cache_hit_rate", cache_hit_rate()},
          {"latency_weights", {{"reranker", reranker_weight}, {"judge", judge_weight}}},
          {"estimated_judge_time_saved", estimated_judge_time_saved()},
          {"estimated_time_ratio", estimated_time_ratio()},
          {"backends", b}};
}

std::string cache_key(const RewardItem& item, const CascadeParams& params, const std::string& backend_fingerprint,
                      bool force_judge) {
  std::vector<std::string> refs;
  refs.reserve(item.references.size());
  for (const auto& r : item.references) refs.push_back(r.canonical_key());
  std::sort(refs.begin(), refs.end());
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  io::FieldHasher h;
  h.add("reward-cache/1").add(item.context).add(item.candidate.canonical_key());
  h.add(std::to_string(refs.size()));
  for (const auto& r : refs) h.add(r);
  h.add(params.fingerprint()).add(backend_fingerprint).add(force_judge ? "judge-always" : "cascade");
  return h.hex();
}

RewardCache::RewardCache(std::optional<std::filesystem::path> path) : path_(std::move(path)) {
  if (!path_) return;
  if (std::filesystem::exists(*path_)) {
    io::read_jsonl(*path_, [&](const ordered_json& row, std::size_t) {
      entries_[row.at("key").get<std::string>()] = outcome_from_json(row);
    });
  }
  out_.open(*path_, std::ios::app);
  if (!out_) throw io::IoError("cannot open cache file " + path_->string());
}

std::optional<RoutingOutcome> RewardCache::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void RewardCache::put(const std::string& key, const RoutingOutcome& outcome) {
  std::lock_guard lock(mu_);
  if (!entries_.emplace(key, outcome).second) return;
  if (out_.is_open()) {
    ordered_json row = {{"key", key}};
    row.update(outcome_json(outcome));
    out_ << row.dump() << '\n';
    out_.flush();
  }
}

std::size_t RewardCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

RewardService::RewardService(std::shared_ptr<BackendSet> backends, std::optional<CascadeParams> params,
                             std::optional<std::filesystem::path> cache_path, unsigned item_workers)
    : backends_(std::move(backends)),
      params_(std::move(params)),
      cache_(std::move(cache_path)),
      item_workers_(item_workers ? item_workers : std::max(1u, std::thread::hardware_concurrency())),
      backend_fingerprint_(backends_->scoring_fingerprint()) {}

std::unique_ptr<RewardService> RewardService::from_config(const ServiceConfig& config) {
  std::optional<CascadeParams> params = config.params;
  if (!params && config.params_path) params = calibrator::read_artifact(*config.params_path).result.params;
  return std::make_unique<RewardService>(std::make_shared<BackendSet>(config), params, config.cache_path,
                                         config.item_workers);
}

ItemResult RewardService::score_item(const RewardItem& item, const CascadeParams& params, bool force_judge) {
  ItemResult r;
  r.request_id = item.request_id;
  const std::string key = cache_key(item, params, backend_fingerprint_, force_judge);
  lookups_.fetch_add(1);
  std::optional<RoutingOutcome> outcome = cache_.get(key);
  if (outcome) {
    hits_.fetch_add(1);
    r.cache_hit = true;
  } else {
    try {
      // Backends are looked up lazily so tool-only traffic runs without them.
      struct LazyScorer final : PairScorer {
        const BackendSet& set;
        bool judge;
        LazyScorer(const BackendSet& s, bool j) : set(s), judge(j) {}
        Score score(std::string_view c, std::string_view cand, std::string_view ref) const override {
          return judge ? judge::judge_soft_score(set.judge(), c, cand, ref)
                       : judge::reranker_score(set.reranker(), c, cand, ref);
        }
      };
      const LazyScorer reranker(*backends_, false), judge(*backends_, true);
      const ScoringContext ctx{item.context, reranker, judge, params, force_judge};
      outcome = reward(item.candidate, item.references, ctx);
      cache_.put(key, *outcome);
    } catch (const ScoringError& e) {
      r.error = ItemError{"scoring", e.what(), e.region()};
    } catch (const judge::BackendError& e) {
      r.error = ItemError{"backend", e.what(), std::nullopt};
    } catch (const std::exception& e) {
      r.error = ItemError{"invalid", e.what(), std::nullopt};
    }
  }
  items_.fetch_add(1);
  if (!outcome) {
    errors_.fetch_add(1);
    return r;
  }
  r.outcome = outcome;
  switch (outcome->path) {
    case ScoringPath::action_mismatch:
      mismatch_.fetch_add(1);
      break;
    case ScoringPath::tool_exact_match:
      tools_.fetch_add(1);
      break;
    case ScoringPath::cascade:
      (outcome->region == Region::fast_pass   ? fast_
       : outcome->region == Region::mix_low ? mix_low_
                                              : mix_high_)
          .fetch_add(1);
      break;
  }
  return r;
}

RewardResponse RewardService::handle_batch(const RewardRequest& request) {
  const auto& params = request.options.params_override ? request.options.params_override : params_;
  if (!params) throw RequestError("no calibration params loaded and no params_override given");
  const auto start = std::chrono::steady_clock::now();
  const auto before = backends_->ledger().snapshot();

  RewardResponse resp;
  resp.items.resize(request.items.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < request.items.size();) {
      resp.items[i] = score_item(request.items[i], *params, request.options.force_judge);
    }
  };
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(item_workers_, std::max<std::size_t>(1, request.items.size())));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::size_t replies = 0, fast = 0;
  for (const auto& it : resp.items) {
    if (it.outcome && it.outcome->path == ScoringPath::cascade) {
      ++replies;
      fast += it.outcome->region == Region::fast_pass;
    }
  }
  resp.batch_stats.fast_pass_fraction = replies ? static_cast<double>(fast) / static_cast<double>(replies) : 0.0;
  resp.batch_stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& [name, c] : backends_->ledger().snapshot()) {
    auto it = before.find(name);
    resp.batch_stats.backend_time_by_name[name] = c.total_latency_s - (it == before.end() ? 0.0 : it->second.total_latency_s);
  }
  return resp;
}

ServiceStats RewardService::stats_snapshot() const {
  ServiceStats s;
  s.items = items_.load();
  s.errors = errors_.load();
  s.cache_hits = hits_.load();
  s.cache_lookups = lookups_.load();
  s.action_mismatch = mismatch_.load();
  s.tool_exact_match = tools_.load();
  s.regions[Region::mix_low] = mix_low_.load();
  s.regions[Region::fast_pass] = fast_.load();
  s.regions[Region::mix_high] = mix_high_.load();
  s.backends = backends_->ledger().snapshot();
  if (backends_->has_reranker()) s.reranker_weight = backends_->reranker().descriptor().nominal_latency_weight;
  if (backends_->has_judge()) s.judge_weight = backends_->judge().descriptor().nominal_latency_weight;
  return s;
}

}  // namespace cascade::service
