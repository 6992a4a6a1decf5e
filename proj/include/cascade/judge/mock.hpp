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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cascade/judge/backend.hpp"
#include "json.hpp"

namespace cascade::judge {

/// Produces a raw response body for a parsed request body.
using MockHandler =
    std::function<std::string(const BackendDescriptor&, const nlohmann::ordered_json& request)>;

/// In-process transport. Deterministic as long as the handler is.
class MockTransport final : public Transport {
 public:
  explicit MockTransport(MockHandler handler) : handler_(std::move(handler)) {}
  std::string post(const BackendDescriptor& backend, const std::string& body) override;
  std::uint64_t requests() const { return requests_.load(); }

 private:
  MockHandler handler_;
  std::atomic<std::uint64_t> requests_{0};
};

namespace mock {

/// Top answer for the backend's mode: score 1, P(Yes) = 1, 一致, 可用.
MockHandler always_yes();

/// Fixed response body for every request.
MockHandler constant(nlohmann::ordered_json response);

/// Responses looked up by (candidate, reference) text, falling back to
/// candidate alone, then to `fallback` (a transport error when null).
struct KeyedEntry {
  std::string candidate;
  std::string reference;  // empty matches any reference
  nlohmann::ordered_json response;
};
MockHandler keyed(std::vector<KeyedEntry> entries, nlohmann::ordered_json fallback = nullptr);

/// Reranker answers keyed on the reranker fixture pairs (statement1 as
/// candidate, statement2 as reference, either order).
MockHandler reranker_fixture(const std::filesystem::path& fixture_json);

/// Content-derived scores with no table: token-set Jaccard similarity J of
/// candidate and reference. Reranker: score J. Soft judge: distribution
/// (K^2, 2K(1-K), (1-K)^2) with K the character-bigram Jaccard. Consistency:
/// 一致 at K >= 0.6, 部分一致 at K >= 0.3, else 不一致. Utility: 可用 at
/// J >= 0.2 against the ticket summary or reference.
MockHandler lexical();

/// Returns `responses` in order, repeating the last one.
MockHandler scripted(std::vector<std::string> responses);

/// Throws BackendError(kind) for the first `n` requests, then delegates.
MockHandler failing(int n, BackendErrorKind kind, MockHandler then);

/// Builds a handler from a config object {"kind": ..., ...}:
///   always_yes | lexical | constant {response} | scripted {responses}
///   keyed {entries:[{candidate, reference?, response}], fallback?}
///   reranker_fixture {path} | failing {n, error, then}
/// Relative paths resolve against `base_dir`.
MockHandler from_config(const nlohmann::ordered_json& spec,
                        const std::filesystem::path& base_dir = {});

/// Token-set and character-bigram Jaccard similarities used by lexical().
double token_jaccard(std::string_view a, std::string_view b);
double bigram_jaccard(std::string_view a, std::string_view b);

}  // namespace mock
}  // namespace cascade::judge
