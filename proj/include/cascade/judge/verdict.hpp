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
#include <string>
#include <string_view>

#include "cascade/core/score.hpp"
#include "json.hpp"

namespace cascade::judge {

/// Judge probabilities over the first verdict token.
class VerdictDistribution {
 public:
  static constexpr double kSumSlack = 1e-6;

  VerdictDistribution(double p_yes, double p_part, double p_no);

  double p_yes() const { return p_yes_; }
  double p_part() const { return p_part_; }
  double p_no() const { return p_no_; }

 private:
  double p_yes_;
  double p_part_;
  double p_no_;
};

/// P(Yes) + 0.5 * P(Part), clamped to [0, 1].
Score soft_score(const VerdictDistribution& d);

enum class ConsistencyLevel { consistent, partial, inconsistent };

std::string_view to_string(ConsistencyLevel level);

/// The five judged dimensions, in prompt order.
inline constexpr std::string_view kConsistencyDimensions[] = {
    "policy_and_process", "operation_guidance", "information_collection",
    "problem_clarification", "information_scope"};

struct ConsistencyVerdict {
  ConsistencyLevel level = ConsistencyLevel::inconsistent;
  std::map<std::string, bool> dimension_flags;  // keys: kConsistencyDimensions
};

/// consistent -> 1, partial -> 0.5, inconsistent -> 0.
Score consistency_score(const ConsistencyVerdict& v);

/// Level labels accepted from backends: the Chinese labels of the judge
/// prompt (一致 / 部分一致 / 不一致) and English consistent / partial /
/// partially / inconsistent. Throws std::invalid_argument naming the value.
ConsistencyLevel parse_consistency_level(std::string_view label);

/// Strict parse of a consistency report
/// {"detailed_consistency": {dim: label, ...}, "judge_result": label}.
/// "detailed_consistency" is optional; when present it must name exactly the
/// five dimensions. Throws std::invalid_argument.
ConsistencyVerdict parse_consistency_report(const nlohmann::ordered_json& report);

/// Strict parse of a utility report's "judge_result": 可用 / Available -> true,
/// 不可用 / Unavailable -> false. Throws std::invalid_argument.
bool parse_utility_report(const nlohmann::ordered_json& report);

/// {"yes": p, "part": p, "no": p}; missing entries are 0. Throws on bad values.
VerdictDistribution parse_distribution(const nlohmann::ordered_json& probabilities);

}  // namespace cascade::judge
