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

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cascade/core/cascade.hpp"
#include "cascade/judge/errors.hpp"
#include "cascade/judge/ledger.hpp"
#include "cascade/judge/verdict.hpp"
#include "json.hpp"

namespace cascade::judge {

/// What a backend computes; sent as "mode" on the wire.
enum class BackendMode { reranker, soft_judge, consistency, utility };

std::string_view to_string(BackendMode mode);
BackendMode backend_mode_from_string(std::string_view s);

struct BackendDescriptor {
  std::string name;
  std::string endpoint;  // http(s)://host:port/path, or mock://<name>
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 8;
  double nominal_latency_weight = 1.0;  // reranker 1, judge about 10
  BackendMode mode = BackendMode::reranker;
  std::string auth_token;       // sent as a Bearer token when non-empty
  std::string prompt_template;  // asset name, empty for none

  void validate() const;
  /// Everything that can change a backend's answers (not its credentials).
  std::string fingerprint() const;
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds base_delay{50};
  bool retry_timeout = true;
  bool retry_transport = true;
  bool retry_malformed = true;

  bool eligible(BackendErrorKind kind) const;
};

/// Moves one request body to a backend and returns the raw response body.
/// Throws BackendError (timeout or transport) on failure.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string post(const BackendDescriptor& backend, const std::string& body) = 0;
};

/// HTTP POST of JSON bodies via cpp-httplib.
std::shared_ptr<Transport> make_http_transport();

class PromptLibrary;

/// One backend: transport plus retries, in-flight limiting and call
/// accounting. Thread-safe.
class BackendClient {
 public:
  BackendClient(BackendDescriptor descriptor, std::shared_ptr<Transport> transport,
                std::shared_ptr<CallLedger> ledger, RetryPolicy retry = {},
                std::shared_ptr<const PromptLibrary> prompts = nullptr);

  const BackendDescriptor& descriptor() const { return descriptor_; }
  const CallLedger& ledger() const { return *ledger_; }

  /// Sends the body; `validate` must throw std::invalid_argument on a
  /// schema mismatch, which surfaces as ParseError. Retries per policy.
  nlohmann::ordered_json call(const nlohmann::ordered_json& body,
                              const std::function<void(const nlohmann::ordered_json&)>& validate) const;

  /// Request body for this backend's mode; adds a rendered prompt when a
  /// template is configured.
  nlohmann::ordered_json request(std::string_view context, std::string_view candidate,
                                 std::optional<std::string_view> reference,
                                 std::optional<std::string_view> ticket_summary = std::nullopt) const;

 private:
  class Slots {
   public:
    explicit Slots(int n) : free_(n) {}
    void acquire();
    void release();

   private:
    std::mutex mu_;
    std::condition_variable cv_;
    int free_;
  };

  BackendDescriptor descriptor_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<CallLedger> ledger_;
  RetryPolicy retry_;
  std::shared_ptr<const PromptLibrary> prompts_;
  std::unique_ptr<Slots> slots_;
};

/// Probability of "yes" from a reranker backend. Texts must be non-empty.
Score reranker_score(const BackendClient& backend, std::string_view context,
                     std::string_view candidate, std::string_view reference);

/// Soft score from a judge backend's verdict-token distribution.
Score judge_soft_score(const BackendClient& backend, std::string_view context,
                       std::string_view candidate, std::string_view reference);

/// Tri-level verdict from a consistency backend.
ConsistencyVerdict consistency_verdict(const BackendClient& backend, std::string_view context,
                                       std::string_view candidate, std::string_view reference);

/// One ensemble member's score: tri-level mapping for consistency
/// backends, soft score for soft_judge backends.
Score member_score(const BackendClient& backend, std::string_view context,
                   std::string_view candidate, std::string_view reference);

/// Mean of member scores. Fails if any member fails.
Score ensemble_consistency(std::string_view context, std::string_view candidate,
                           std::string_view reference,
                           std::span<const BackendClient* const> members);

/// Arithmetic mean summed in sorted order, so the result does not depend on
/// member order.
Score mean_of(std::span<const Score> scores);

/// True iff the utility backend reports "Available".
bool utility_pass(const BackendClient& backend, std::string_view context,
                  std::string_view candidate, std::string_view ticket_summary,
                  std::string_view ref_reply);

/// PairScorer adapters for reward-core.
class RerankerScorer final : public PairScorer {
 public:
  explicit RerankerScorer(const BackendClient& backend) : backend_(backend) {}
  Score score(std::string_view context, std::string_view candidate,
              std::string_view reference) const override {
    return reranker_score(backend_, context, candidate, reference);
  }

 private:
  const BackendClient& backend_;
};

class SoftJudgeScorer final : public PairScorer {
 public:
  explicit SoftJudgeScorer(const BackendClient& backend) : backend_(backend) {}
  Score score(std::string_view context, std::string_view candidate,
              std::string_view reference) const override {
    return judge_soft_score(backend_, context, candidate, reference);
  }

 private:
  const BackendClient& backend_;
};

class EnsembleScorer final : public PairScorer {
 public:
  explicit EnsembleScorer(std::vector<const BackendClient*> members)
      : members_(std::move(members)) {}
  Score score(std::string_view context, std::string_view candidate,
              std::string_view reference) const override {
    return ensemble_consistency(context, candidate, reference, members_);
  }

 private:
  std::vector<const BackendClient*> members_;
};

}  // namespace cascade::judge
