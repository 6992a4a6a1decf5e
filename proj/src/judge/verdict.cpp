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

#include "cascade/judge/verdict.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "cascade/core/action.hpp"

namespace cascade::judge {

using nlohmann::ordered_json;

namespace {

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

std::string label_of(const ordered_json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

bool parse_dimension_flag(const std::string& dim, const ordered_json& v) {
  if (!v.is_string()) throw std::invalid_argument("dimension " + dim + " is not a string: " + v.dump());
  const std::string s = canonical::trim(v.get<std::string>());
  if (s == "一致" || s == "consistent" || s == "Consistent") return true;
  if (s == "不一致" || s == "inconsistent" || s == "Inconsistent") return false;
  throw std::invalid_argument("unknown label for dimension " + dim + ": \"" + s + "\"");
}

}  // namespace

VerdictDistribution::VerdictDistribution(double p_yes, double p_part, double p_no)
    : p_yes_(p_yes), p_part_(p_part), p_no_(p_no) {
  if (!in_unit(p_yes) || !in_unit(p_part) || !in_unit(p_no)) {
    throw std::invalid_argument("verdict probabilities must lie in [0, 1]");
  }
  if (p_yes + p_part + p_no > 1.0 + kSumSlack) {
    throw std::invalid_argument("verdict probabilities sum above 1");
  }
}

Score soft_score(const VerdictDistribution& d) {
  return Score::clamped(d.p_yes() + 0.5 * d.p_part());
}

std::string_view to_string(ConsistencyLevel level) {
  switch (level) {
    case ConsistencyLevel::consistent:
      return "consistent";
    case ConsistencyLevel::partial:
      return "partial";
    case ConsistencyLevel::inconsistent:
      return "inconsistent";
  }
  return "unknown";
}

Score consistency_score(const ConsistencyVerdict& v) {
  switch (v.level) {
    case ConsistencyLevel::consistent:
      return Score::one();
    case ConsistencyLevel::partial:
      return Score::of(0.5);
    case ConsistencyLevel::inconsistent:
      break;
  }
  return Score::zero();
}

ConsistencyLevel parse_consistency_level(std::string_view label) {
  const std::string s = canonical::trim(label);
  if (s == "一致" || s == "consistent" || s == "Consistent") return ConsistencyLevel::consistent;
  if (s == "部分一致" || s == "partial" || s == "partially" || s == "Partial" || s == "Partially") {
    return ConsistencyLevel::partial;
  }
  if (s == "不一致" || s == "inconsistent" || s == "Inconsistent") {
    return ConsistencyLevel::inconsistent;
  }
  throw std::invalid_argument("unknown consistency level: \"" + s + "\"");
}

ConsistencyVerdict parse_consistency_report(const ordered_json& report) {
  if (!report.is_object()) throw std::invalid_argument("consistency report is not a JSON object");
  auto result = report.find("judge_result");
  if (result == report.end()) throw std::invalid_argument("consistency report lacks judge_result");
  if (!result->is_string()) {
    throw std::invalid_argument("unknown consistency level: " + label_of(*result));
  }
  ConsistencyVerdict v;
  v.level = parse_consistency_level(result->get<std::string>());

  auto detail = report.find("detailed_consistency");
  if (detail == report.end()) return v;
  if (!detail->is_object()) throw std::invalid_argument("detailed_consistency is not an object");
  const std::set<std::string> expected(std::begin(kConsistencyDimensions),
                                       std::end(kConsistencyDimensions));
  for (const auto& [key, value] : detail->items()) {
    if (!expected.count(key)) throw std::invalid_argument("unexpected consistency dimension: " + key);
    v.dimension_flags[key] = parse_dimension_flag(key, value);
  }
  for (const auto& dim : expected) {
    if (!v.dimension_flags.count(dim)) {
      throw std::invalid_argument("missing consistency dimension: " + dim);
    }
  }
  return v;
}

bool parse_utility_report(const ordered_json& report) {
  if (!report.is_object()) throw std::invalid_argument("utility report is not a JSON object");
  auto result = report.find("judge_result");
  if (result == report.end()) throw std::invalid_argument("utility report lacks judge_result");
  if (!result->is_string()) throw std::invalid_argument("unknown utility verdict: " + result->dump());
  const std::string s = canonical::trim(result->get<std::string>());
  if (s == "可用" || s == "Available" || s == "available") return true;
  if (s == "不可用" || s == "Unavailable" || s == "unavailable") return false;
  throw std::invalid_argument("unknown utility verdict: \"" + s + "\"");
}

VerdictDistribution parse_distribution(const ordered_json& probabilities) {
  if (!probabilities.is_object()) throw std::invalid_argument("probabilities is not an object");
  auto get = [&](const char* key) {
    auto it = probabilities.find(key);
    if (it == probabilities.end()) return 0.0;
    if (!it->is_number()) throw std::invalid_argument(std::string("probability ") + key + " is not a number");
    return it->get<double>();
  };
  for (const auto& [key, _] : probabilities.items()) {
    if (key != "yes" && key != "part" && key != "no") {
      throw std::invalid_argument("unknown verdict token in probabilities: " + key);
    }
  }
  return VerdictDistribution(get("yes"), get("part"), get("no"));
}

}  // namespace cascade::judge
