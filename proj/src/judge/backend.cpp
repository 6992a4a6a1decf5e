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

#include "cascade/judge/backend.hpp"

#include <algorithm>
#include <sstream>
#include <thread>
#include <vector>

#include "cascade/judge/prompts.hpp"

namespace cascade::judge {

using nlohmann::ordered_json;

std::string_view to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::timeout:
      return "timeout";
    case BackendErrorKind::transport:
      return "transport";
    case BackendErrorKind::malformed_payload:
      return "malformed_payload";
  }
  return "unknown";
}

std::string_view to_string(BackendMode mode) {
  switch (mode) {
    case BackendMode::reranker:
      return "reranker";
    case BackendMode::soft_judge:
      return "soft_judge";
    case BackendMode::consistency:
      return "consistency";
    case BackendMode::utility:
      return "utility";
  }
  return "unknown";
}

BackendMode backend_mode_from_string(std::string_view s) {
  if (s == "reranker") return BackendMode::reranker;
  if (s == "soft_judge") return BackendMode::soft_judge;
  if (s == "consistency") return BackendMode::consistency;
  if (s == "utility") return BackendMode::utility;
  throw std::invalid_argument("unknown backend mode: " + std::string(s));
}

void BackendDescriptor::validate() const {
  if (name.empty()) throw std::invalid_argument("backend name must be non-empty");
  if (endpoint.empty()) throw std::invalid_argument("backend " + name + ": endpoint must be non-empty");
  if (max_in_flight < 1) throw std::invalid_argument("backend " + name + ": max_in_flight < 1");
  if (!(nominal_latency_weight > 0.0)) {
    throw std::invalid_argument("backend " + name + ": nominal_latency_weight must be > 0");
  }
  if (timeout.count() <= 0) throw std::invalid_argument("backend " + name + ": timeout must be > 0");
}

std::string BackendDescriptor::fingerprint() const {
  std::ostringstream ss;
  ss << name << '|' << endpoint << '|' << to_string(mode) << '|' << prompt_template;
  return ss.str();
}

bool RetryPolicy::eligible(BackendErrorKind kind) const {
  switch (kind) {
    case BackendErrorKind::timeout:
      return retry_timeout;
    case BackendErrorKind::transport:
      return retry_transport;
    case BackendErrorKind::malformed_payload:
      return retry_malformed;
  }
  return false;
}

void BackendClient::Slots::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void BackendClient::Slots::release() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

BackendClient::BackendClient(BackendDescriptor descriptor, std::shared_ptr<Transport> transport,
                             std::shared_ptr<CallLedger> ledger, RetryPolicy retry,
                             std::shared_ptr<const PromptLibrary> prompts)
    : descriptor_(std::move(descriptor)),
      transport_(std::move(transport)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<CallLedger>()),
      retry_(retry),
      prompts_(std::move(prompts)) {
  descriptor_.validate();
  if (!transport_) throw std::invalid_argument("backend " + descriptor_.name + " has no transport");
  if (retry_.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  slots_ = std::make_unique<Slots>(descriptor_.max_in_flight);
}

ordered_json BackendClient::request(std::string_view context, std::string_view candidate,
                                    std::optional<std::string_view> reference,
                                    std::optional<std::string_view> ticket_summary) const {
  ordered_json body;
  body["mode"] = std::string(to_string(descriptor_.mode));
  body["context"] = std::string(context);
  body["candidate"] = std::string(candidate);
  if (reference) body["reference"] = std::string(*reference);
  if (ticket_summary) body["ticket_summary"] = std::string(*ticket_summary);
  if (prompts_ && !descriptor_.prompt_template.empty()) {
    std::map<std::string, std::string> vars{{"context", std::string(context)},
                                            {"candidate", std::string(candidate)}};
    if (reference) vars["reference"] = std::string(*reference);
    if (ticket_summary) vars["ticket_summary"] = std::string(*ticket_summary);
    body["prompt"] = prompts_->render(descriptor_.prompt_template, vars);
  }
  return body;
}

ordered_json BackendClient::call(const ordered_json& body,
                                 const std::function<void(const ordered_json&)>& validate) const {
  const std::string payload = body.dump();
  for (int attempt = 0;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    try {
      std::string raw;
      {
        slots_->acquire();
        struct Release {
          Slots& slots;
          ~Release() { slots.release(); }
        } release{*slots_};
        raw = transport_->post(descriptor_, payload);
      }
      ordered_json response;
      try {
        response = ordered_json::parse(raw);
        validate(response);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(descriptor_.name, std::string("unparseable response: ") + e.what(), raw);
      } catch (const std::invalid_argument& e) {
        throw ParseError(descriptor_.name, e.what(), raw);
      } catch (const std::out_of_range& e) {
        throw ParseError(descriptor_.name, e.what(), raw);
      }
      ledger_->record(descriptor_.name, std::chrono::steady_clock::now() - start, false);
      return response;
    } catch (const BackendError& e) {
      ledger_->record(descriptor_.name, std::chrono::steady_clock::now() - start, true);
      if (attempt >= retry_.max_retries || !retry_.eligible(e.kind())) throw;
      std::this_thread::sleep_for(retry_.base_delay * (1 << attempt));
    }
  }
}

namespace {

void require_texts(std::string_view candidate, std::string_view reference) {
  if (candidate.empty() || reference.empty()) {
    throw std::invalid_argument("candidate and reference texts must be non-empty");
  }
}

Score parse_reranker(const ordered_json& r) {
  if (!r.is_object()) throw std::invalid_argument("reranker response is not an object");
  if (auto it = r.find("score"); it != r.end()) {
    if (!it->is_number()) throw std::invalid_argument("reranker score is not a number");
    const double v = it->get<double>();
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("reranker score outside [0, 1]: " + it->dump());
    return Score::of(v);
  }
  if (auto it = r.find("probabilities"); it != r.end()) {
    return Score::of(parse_distribution(*it).p_yes());
  }
  throw std::invalid_argument("reranker response has neither score nor probabilities");
}

VerdictDistribution parse_soft(const ordered_json& r) {
  if (!r.is_object()) throw std::invalid_argument("judge response is not an object");
  auto it = r.find("probabilities");
  if (it == r.end()) throw std::invalid_argument("judge response lacks probabilities");
  return parse_distribution(*it);
}

// "verdict" may be the report object or its JSON text as emitted by the LLM.
ordered_json verdict_report(const ordered_json& r) {
  if (!r.is_object()) throw std::invalid_argument("verdict response is not an object");
  auto it = r.find("verdict");
  if (it == r.end()) throw std::invalid_argument("response lacks verdict");
  if (it->is_object()) return *it;
  if (it->is_string()) {
    try {
      return ordered_json::parse(it->get<std::string>());
    } catch (const nlohmann::json::parse_error&) {
      throw std::invalid_argument("verdict text is not valid JSON");
    }
  }
  throw std::invalid_argument("verdict is neither an object nor JSON text");
}

void expect_mode(const BackendClient& b, std::initializer_list<BackendMode> modes) {
  if (std::find(modes.begin(), modes.end(), b.descriptor().mode) == modes.end()) {
    throw std::invalid_argument("backend " + b.descriptor().name + " has mode " +
                                std::string(to_string(b.descriptor().mode)));
  }
}

}  // namespace

Score reranker_score(const BackendClient& backend, std::string_view context,
                     std::string_view candidate, std::string_view reference) {
  expect_mode(backend, {BackendMode::reranker});
  require_texts(candidate, reference);
  const auto r = backend.call(backend.request(context, candidate, reference),
                              [](const ordered_json& j) { parse_reranker(j); });
  return parse_reranker(r);
}

Score judge_soft_score(const BackendClient& backend, std::string_view context,
                       std::string_view candidate, std::string_view reference) {
  expect_mode(backend, {BackendMode::soft_judge});
  require_texts(candidate, reference);
  const auto r = backend.call(backend.request(context, candidate, reference),
                              [](const ordered_json& j) { parse_soft(j); });
  return soft_score(parse_soft(r));
}

ConsistencyVerdict consistency_verdict(const BackendClient& backend, std::string_view context,
                                       std::string_view candidate, std::string_view reference) {
  expect_mode(backend, {BackendMode::consistency});
  require_texts(candidate, reference);
  const auto r = backend.call(backend.request(context, candidate, reference), [](const ordered_json& j) {
    parse_consistency_report(verdict_report(j));
  });
  return parse_consistency_report(verdict_report(r));
}

Score member_score(const BackendClient& backend, std::string_view context,
                   std::string_view candidate, std::string_view reference) {
  switch (backend.descriptor().mode) {
    case BackendMode::consistency:
      return consistency_score(consistency_verdict(backend, context, candidate, reference));
    case BackendMode::soft_judge:
      return judge_soft_score(backend, context, candidate, reference);
    default:
      throw std::invalid_argument("ensemble member " + backend.descriptor().name +
                                  " must be a consistency or soft_judge backend");
  }
}

Score mean_of(std::span<const Score> scores) {
  if (scores.empty()) throw std::invalid_argument("mean of no scores");
  std::vector<double> v;
  v.reserve(scores.size());
  for (Score s : scores) v.push_back(s.value());
  std::sort(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) total += x;
  return Score::clamped(total / static_cast<double>(v.size()));
}

Score ensemble_consistency(std::string_view context, std::string_view candidate,
                           std::string_view reference,
                           std::span<const BackendClient* const> members) {
  if (members.empty()) throw std::invalid_argument("ensemble needs at least one backend");
  std::vector<Score> scores;
  scores.reserve(members.size());
  for (const BackendClient* m : members) {
    scores.push_back(member_score(*m, context, candidate, reference));
  }
  return mean_of(scores);
}

bool utility_pass(const BackendClient& backend, std::string_view context,
                  std::string_view candidate, std::string_view ticket_summary,
                  std::string_view ref_reply) {
  expect_mode(backend, {BackendMode::utility});
  require_texts(candidate, ref_reply);
  const auto r = backend.call(backend.request(context, candidate, ref_reply, ticket_summary),
                              [](const ordered_json& j) { parse_utility_report(verdict_report(j)); });
  return parse_utility_report(verdict_report(r));
}

}  // namespace cascade::judge
