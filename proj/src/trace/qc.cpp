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

#include "cascade/trace/qc.hpp"

#include <stdexcept>

namespace cascade::trace {

using nlohmann::ordered_json;

namespace {

int binary_score(const ordered_json& v, const std::string& where) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    if (v.is_number_float() && (v.get<double>() == 0.0 || v.get<double>() == 1.0)) {
      return static_cast<int>(v.get<double>());
    }
    throw std::invalid_argument(where + " score must be 0 or 1, got " + v.dump());
  }
  const auto s = v.get<long long>();
  if (s != 0 && s != 1) throw std::invalid_argument(where + " score must be 0 or 1, got " + v.dump());
  return static_cast<int>(s);
}

std::string text(const ordered_json& j, const char* key, bool required) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) throw std::invalid_argument(std::string("missing field \"") + key + "\"");
    return {};
  }
  if (!it->is_string()) throw std::invalid_argument(std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

}  // namespace

RewriteQCReport RewriteQCReport::from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("rewrite QC report must be a JSON object");
  RewriteQCReport r;
  for (const char* dim : kDimensions) {
    auto it = j.find(dim);
    if (it == j.end() || !it->is_object()) {
      throw std::invalid_argument(std::string("rewrite QC report needs object \"") + dim + "\"");
    }
    auto score = it->find("score");
    if (score == it->end()) throw std::invalid_argument(std::string(dim) + " lacks a score");
    r.dimensions[dim] = {binary_score(*score, dim), text(*it, "details", false)};
  }
  r.violation_list = text(j, "violation_list", false);
  return r;
}

PlanQCReport PlanQCReport::from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("plan QC report must be a JSON object");
  auto scores = j.find("scores");
  if (scores == j.end() || !scores->is_object()) throw std::invalid_argument("plan QC report needs \"scores\"");
  PlanQCReport r;
  int sum = 0;
  for (const char* dim : kDimensions) {
    auto it = scores->find(dim);
    if (it == scores->end()) throw std::invalid_argument(std::string("plan QC scores lack \"") + dim + "\"");
    r.scores[dim] = binary_score(*it, dim);
    sum += r.scores[dim];
  }
  auto total = j.find("total_score");
  if (total == j.end() || !total->is_number_integer()) {
    throw std::invalid_argument("plan QC report needs an integer total_score");
  }
  r.total_score = total->get<int>();
  if (r.total_score != sum) {
    throw std::invalid_argument("total_score " + std::to_string(r.total_score) + " != sum of scores " +
                                std::to_string(sum));
  }
  if (auto a = j.find("analysis"); a != j.end()) {
    if (!a->is_object()) throw std::invalid_argument("\"analysis\" must be an object");
    for (const auto& [k, v] : a->items()) {
      if (!v.is_string()) throw std::invalid_argument("analysis." + k + " must be a string");
      r.analysis[k] = v.get<std::string>();
    }
  }
  r.violation_details = text(j, "violation_details", false);
  r.final_judgment = text(j, "final_judgment", false);
  return r;
}

QcReport parse_qc_report(const ordered_json& j) {
  if (j.is_object() && j.contains("scores")) return PlanQCReport::from_json(j);
  return RewriteQCReport::from_json(j);
}

std::vector<std::pair<std::string, int>> dimension_scores(const QcReport& r) {
  std::vector<std::pair<std::string, int>> out;
  if (const auto* rw = std::get_if<RewriteQCReport>(&r)) {
    for (const char* d : RewriteQCReport::kDimensions) out.emplace_back(d, rw->dimensions.at(d).score);
  } else {
    const auto& p = std::get<PlanQCReport>(r);
    for (const char* d : PlanQCReport::kDimensions) out.emplace_back(d, p.scores.at(d));
  }
  return out;
}

QcPolicy QcPolicy::from_json(const ordered_json& j) {
  QcPolicy p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw std::invalid_argument("QC policy must be a JSON object");
  if (auto w = j.find("waived"); w != j.end()) {
    for (const auto& d : *w) p.waived.insert(d.get<std::string>());
  }
  return p;
}

bool gate_by_qc(std::span<const QcReport> reports, const QcPolicy& policy) {
  for (const auto& r : reports) {
    for (const auto& [dim, score] : dimension_scores(r)) {
      if (score != 1 && !policy.waived.count(dim)) return false;
    }
  }
  return true;
}

}  // namespace cascade::trace
