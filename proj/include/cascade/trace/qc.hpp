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
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace cascade::trace {

struct QcDimension {
  int score = 0;  // exactly 0 or 1
  std::string details;
};

/// Rewrite quality check: five binary dimensions plus a violation list.
struct RewriteQCReport {
  static constexpr const char* kDimensions[] = {"logic_consistency", "phrasing_check", "plans_anonymized",
                                                "actions_preserved", "actions_accuracy"};
  std::map<std::string, QcDimension> dimensions;
  std::string violation_list;

  static RewriteQCReport from_json(const nlohmann::ordered_json& j);
};

/// Plan quality check: three binary scores whose sum is total_score.
struct PlanQCReport {
  static constexpr const char* kDimensions[] = {"compliance_score", "structure_score", "anonymization_score"};
  std::map<std::string, int> scores;
  int total_score = 0;
  std::map<std::string, std::string> analysis;
  std::string violation_details;
  std::string final_judgment;

  static PlanQCReport from_json(const nlohmann::ordered_json& j);
};

using QcReport = std::variant<RewriteQCReport, PlanQCReport>;

/// Chooses the schema by shape ("scores" object means plan QC). Throws
/// std::invalid_argument on any schema mismatch.
QcReport parse_qc_report(const nlohmann::ordered_json& j);

/// (dimension, score) pairs of a report, in schema order.
std::vector<std::pair<std::string, int>> dimension_scores(const QcReport& r);

/// Dimensions listed in `waived` are not required to score 1.
struct QcPolicy {
  std::set<std::string> waived;
  static QcPolicy from_json(const nlohmann::ordered_json& j);
};

/// True iff every non-waived dimension of every report scores 1.
bool gate_by_qc(std::span<const QcReport> reports, const QcPolicy& policy = {});

}  // namespace cascade::trace
