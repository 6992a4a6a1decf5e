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

#include "cascade/trace/sft.hpp"

#include <optional>
#include <random>
#include <stdexcept>

namespace cascade::trace {

using nlohmann::ordered_json;

SftMode sft_mode_from_string(std::string_view s) {
  if (s == "decision") return SftMode::decision;
  if (s == "mix") return SftMode::mix;
  throw std::invalid_argument("unknown SFT mode: " + std::string(s));
}

namespace {

ordered_json message(const char* role, std::string content) {
  return {{"role", role}, {"content", std::move(content)}};
}

std::string action_text(const Candidate& c) {
  if (c.kind() == ActionKind::reply) return c.reply_text();
  ordered_json j = {{"action", "call_tool"}};
  j["tool_name"] = c.tool_call().tool_name();
  j["parameters"] = c.tool_call().parameters();
  return j.dump();
}

}  // namespace

ordered_json render_sft_record(const SftInput& in) {
  ordered_json rec;
  ordered_json messages = ordered_json::array();
  if (const auto* d = std::get_if<DRARecord>(&in)) {
    rec["id"] = d->id;
    rec["type"] = "decision";
    messages.push_back(message("user", d->query_context));
    if (!d->rationale.empty()) messages.push_back(message("reasoning", d->rationale));
    messages.push_back(message("assistant", action_text(d->response)));
  } else {
    const auto& p = std::get<PlanningRecord>(in);
    rec["id"] = p.id;
    rec["type"] = "planning";
    messages.push_back(message("user", p.query_context));
    if (!p.rationale.empty()) messages.push_back(message("reasoning", p.rationale));
    messages.push_back(message("assistant", serialize_plan_trace(p.trace)));
  }
  rec["messages"] = std::move(messages);
  return rec;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Modulo bias is irrelevant at dataset sizes; what matters is that the
  // sequence is fixed by the standard engine rather than a library shuffle.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::vector<ordered_json> build_sft_records(std::span<const SftInput> inputs, SftMode mode, std::uint64_t seed) {
  std::vector<ordered_json> out;
  out.reserve(inputs.size());
  if (mode == SftMode::decision) {
    for (const auto& in : inputs) out.push_back(render_sft_record(in));
    return out;
  }
  for (std::size_t i : seeded_permutation(inputs.size(), seed)) out.push_back(render_sft_record(inputs[i]));
  return out;
}

TeacherOutput teacher_output_from_json(const ordered_json& row) {
  if (!row.is_object()) throw std::invalid_argument("teacher output must be a JSON object");
  auto str = [&](const char* k, bool required) {
    auto it = row.find(k);
    if (it == row.end() || it->is_null()) {
      if (required) throw std::invalid_argument(std::string("missing field \"") + k + "\"");
      return std::string();
    }
    if (!it->is_string()) throw std::invalid_argument(std::string("field \"") + k + "\" must be a string");
    return it->get<std::string>();
  };
  std::string id = row.contains("id") ? str("id", true) : str("query_id", true);
  const std::string type = str("type", true);
  auto record = [&]() -> SftInput {
    if (type == "decision") {
      auto resp = row.find("response");
      if (resp == row.end()) throw std::invalid_argument("decision record needs \"response\"");
      return DRARecord{id, str("context", false), str("rationale", false), Candidate::from_json(*resp)};
    }
    if (type == "planning") {
      return PlanningRecord{id, str("context", false), str("rationale", false), parse_plan_trace(str("trace", true))};
    }
    throw std::invalid_argument("unknown record type: " + type);
  };
  TeacherOutput out{record(), {}};
  if (auto qc = row.find("qc"); qc != row.end()) {
    if (!qc->is_array()) throw std::invalid_argument("\"qc\" must be an array");
    for (const auto& r : *qc) out.qc.push_back(parse_qc_report(r));
  }
  return out;
}

ordered_json Rejection::to_json() const {
  ordered_json v = ordered_json::array();
  for (const auto& x : violations) v.push_back({{"rule", x.rule}, {"section", x.section}, {"detail", x.detail}});
  return {{"id", id}, {"reason", reason}, {"violations", v}, {"detail", detail}};
}

AugmentResult augment(std::span<const ordered_json> rows, const ValidationRules& rules, const QcPolicy& policy,
                      SftMode mode, std::uint64_t seed) {
  AugmentResult result;
  std::vector<SftInput> gated;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string fallback_id = "row " + std::to_string(i + 1);
    std::optional<TeacherOutput> parsed;
    try {
      parsed = teacher_output_from_json(rows[i]);
    } catch (const std::exception& e) {
      std::string id = fallback_id;
      if (rows[i].is_object() && rows[i].contains("id") && rows[i]["id"].is_string()) id = rows[i]["id"];
      result.rejected.push_back({id, "parse_error", {}, e.what()});
      continue;
    }
    TeacherOutput& t = *parsed;
    if (const auto* p = std::get_if<PlanningRecord>(&t.record)) {
      auto violations = validate_plan_trace(p->trace, rules, p->rationale);
      if (!violations.empty()) {
        result.rejected.push_back({p->id, "validation", std::move(violations), ""});
        continue;
      }
    } else {
      const auto& d = std::get<DRARecord>(t.record);
      if (rules.require_rationale && canonical::trim(d.rationale).empty()) {
        result.rejected.push_back({d.id, "validation", {{"empty_rationale", "rationale", "rationale is required"}}, ""});
        continue;
      }
    }
    if (!gate_by_qc(t.qc, policy)) {
      const std::string id = std::visit([](const auto& r) { return r.id; }, t.record);
      result.rejected.push_back({id, "qc_gate", {}, "a required QC dimension scored 0"});
      continue;
    }
    gated.push_back(std::move(t.record));
  }
  result.records = build_sft_records(gated, mode, seed);
  return result;
}

}  // namespace cascade::trace
