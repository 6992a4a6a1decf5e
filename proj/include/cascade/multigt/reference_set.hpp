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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cascade/core/action.hpp"
#include "json.hpp"

namespace cascade::multigt {

enum class SourceTag { logged_original, online_consistency, offline_consistency, utility };

std::string_view to_string(SourceTag tag);
SourceTag source_tag_from_string(std::string_view s);

/// Where a candidate batch came from. Fixed at ingestion.
enum class Origin { offline_exploration, online_rollout };

std::string_view to_string(Origin origin);
Origin origin_from_string(std::string_view s);

struct Reference {
  Candidate candidate;
  SourceTag tag;
};

/// Multi-GT reference set for one query. At least one logged_original
/// reference; no two references share a canonical key.
class ReferenceSet {
 public:
  ReferenceSet(std::string query_id, std::string context, std::vector<Reference> refs,
               std::optional<std::string> ticket_summary = std::nullopt);

  const std::string& query_id() const { return query_id_; }
  const std::string& context() const { return context_; }
  const std::optional<std::string>& ticket_summary() const { return ticket_summary_; }
  const std::vector<Reference>& references() const { return refs_; }
  std::size_t size() const { return refs_.size(); }

  /// The first logged_original reference.
  const Reference& logged_original() const;

  bool contains(const Candidate& c) const;

  /// Appends unless a reference with the same canonical key exists.
  bool add(Reference r);

  std::vector<Candidate> candidates() const;

  /// {query_id, context, ticket_summary?, references:[{kind, text|tool_call, source_tag}]}
  nlohmann::ordered_json to_json() const;
  static ReferenceSet from_json(const nlohmann::ordered_json& j);

 private:
  std::string query_id_;
  std::string context_;
  std::optional<std::string> ticket_summary_;
  std::vector<Reference> refs_;
};

/// Verdicts recorded from an earlier run, used for replay.
struct RecordedVerdicts {
  std::optional<bool> consistent;
  std::optional<bool> useful;
};

struct BatchCandidate {
  Candidate candidate;
  RecordedVerdicts recorded;
};

/// {query_id, origin, candidates:[{kind, text|tool_call, recorded?:{consistency, utility}}]}
/// Recorded labels use the judge vocabularies (一致/部分一致/不一致, 可用/不可用, or
/// the English equivalents).
struct CandidateBatch {
  std::string query_id;
  Origin origin = Origin::offline_exploration;
  std::vector<BatchCandidate> candidates;

  nlohmann::ordered_json to_json() const;
  static CandidateBatch from_json(const nlohmann::ordered_json& j);
};

}  // namespace cascade::multigt
