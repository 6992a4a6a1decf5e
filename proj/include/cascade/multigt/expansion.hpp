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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/core/cascade.hpp"
#include "cascade/judge/backend.hpp"
#include "cascade/multigt/reference_set.hpp"
#include "json.hpp"

namespace cascade::multigt {

/// Max over references of the ensemble score of (candidate, reference).
/// Any ensemble failure propagates; there is no partial max.
Score ecs(std::string_view context, const Candidate& candidate, const ReferenceSet& refs,
          const PairScorer& ensemble);

/// Ensemble score against the logged_original reference only.
Score single_reference_score(std::string_view context, const Candidate& candidate,
                             const ReferenceSet& refs, const PairScorer& ensemble);

/// The two admission filters.
class AdmissionJudge {
 public:
  virtual ~AdmissionJudge() = default;
  /// Consistency verdict of the candidate against one existing reference.
  virtual bool consistent(const ReferenceSet& refs, const BatchCandidate& c,
                          const Reference& against) const = 0;
  /// Utility verdict of the candidate given the ticket summary.
  virtual bool useful(const ReferenceSet& refs, const BatchCandidate& c) const = 0;
};

/// Live filters backed by a consistency backend and a utility backend.
/// Utility compares against the logged_original reply and needs the set's
/// ticket summary.
class BackendAdmissionJudge final : public AdmissionJudge {
 public:
  BackendAdmissionJudge(const judge::BackendClient& consistency, const judge::BackendClient& utility)
      : consistency_(consistency), utility_(utility) {}
  bool consistent(const ReferenceSet& refs, const BatchCandidate& c, const Reference& against) const override;
  bool useful(const ReferenceSet& refs, const BatchCandidate& c) const override;

 private:
  const judge::BackendClient& consistency_;
  const judge::BackendClient& utility_;
};

/// Replays the verdicts recorded on each candidate. A missing recording is
/// an error, so replays never invent verdicts.
class ReplayJudge final : public AdmissionJudge {
 public:
  bool consistent(const ReferenceSet& refs, const BatchCandidate& c, const Reference& against) const override;
  bool useful(const ReferenceSet& refs, const BatchCandidate& c) const override;
};

struct FilterDecision {
  bool accepted = false;
  std::optional<SourceTag> tag;
};

/// Consistency against any existing reference first (tagged by origin),
/// then utility. Backend failures propagate.
FilterDecision dual_filter(const ReferenceSet& refs, const BatchCandidate& c, Origin origin,
                           const AdmissionJudge& judge);

struct ExpansionError {
  std::string query_id;
  std::size_t batch_index = 0;
  std::size_t candidate_index = 0;
  std::string error;

  nlohmann::ordered_json to_json() const;
};

struct ExpansionResult {
  ReferenceSet refs;
  std::vector<ExpansionError> errors;  // still failing after the retry pass
  std::size_t skipped_duplicates = 0;
  std::size_t rejected = 0;
};

/// Admits candidates from `batches` (all for refs.query_id) in order. A
/// candidate that fails is retried once after the main pass; persistent
/// failures land in `errors`. Duplicates of existing references are skipped,
/// so re-running on the output is a fixed point.
ExpansionResult expand_reference_set(const ReferenceSet& refs, std::span<const CandidateBatch> batches,
                                     const AdmissionJudge& judge);

struct ExpansionRun {
  std::vector<ExpansionResult> results;  // same order as the input sets
  std::vector<ExpansionError> unmatched;  // batches naming an unknown query
};

/// Expands every set with its batches (grouped by query_id). Queries run in
/// parallel; output keeps the input order.
ExpansionRun expand_all(std::span<const ReferenceSet> refsets,
                                        std::span<const CandidateBatch> batches,
                                        const AdmissionJudge& judge, unsigned threads = 0);

struct ExpansionStats {
  std::string split_name;
  std::size_t n_queries = 0;
  std::size_t single_gt = 0;
  std::size_t multi_gt = 0;
  std::size_t added = 0;
  std::map<SourceTag, std::size_t> by_source;  // excludes logged_original
  double expand_pct = 0.0;

  nlohmann::ordered_json to_json() const;
};

ExpansionStats expansion_report(std::span<const ReferenceSet> refsets, std::string split_name);

/// Header plus one row per split, columns in the order
/// Split, #Queries, Single-GT, Multi-GT, +Added, Con. Judge(online),
/// Con. Judge(offline), Utility Judge, Expand %.
std::string format_expansion_table(std::span<const ExpansionStats> rows);

}  // namespace cascade::multigt
