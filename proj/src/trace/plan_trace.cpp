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

#include "cascade/trace/plan_trace.hpp"

#include <algorithm>
#include <array>

#include "json.hpp"

namespace cascade::trace {

using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 8> kTags = {"<plans>",  "<plan_1>",  "</plan_1>", "<plan_2>",
                                                   "</plan_2>", "</plans>", "<actions>", "</actions>"};

bool has_tag(std::string_view s) {
  return std::any_of(kTags.begin(), kTags.end(), [&](std::string_view t) { return s.find(t) != s.npos; });
}

}  // namespace

std::string_view to_string(TraceErrorCode code) {
  switch (code) {
    case TraceErrorCode::missing_tag:
      return "missing_tag";
    case TraceErrorCode::duplicate_tag:
      return "duplicate_tag";
    case TraceErrorCode::unclosed_tag:
      return "unclosed_tag";
    case TraceErrorCode::tag_order:
      return "tag_order";
    case TraceErrorCode::empty_plan:
      return "empty_plan";
    case TraceErrorCode::malformed_actions:
      return "malformed_actions";
  }
  return "unknown";
}

PlanTrace PlanTrace::make(std::string plan_1, std::string plan_2, std::vector<ToolCall> actions) {
  PlanTrace t;
  t.plan_1_ = canonical::trim(plan_1);
  t.plan_2_ = canonical::trim(plan_2);
  if (t.plan_1_.empty() || t.plan_2_.empty()) throw std::invalid_argument("plan sections must be non-empty");
  if (has_tag(t.plan_1_) || has_tag(t.plan_2_)) throw std::invalid_argument("plan text contains a trace tag");
  t.actions_ = std::move(actions);
  return t;
}

PlanTrace parse_plan_trace(std::string_view raw) {
  std::array<std::size_t, kTags.size()> pos{};
  for (std::size_t i = 0; i < kTags.size(); ++i) {
    const std::size_t at = raw.find(kTags[i]);
    pos[i] = at;
    if (at != raw.npos && raw.find(kTags[i], at + kTags[i].size()) != raw.npos) {
      throw TraceParseError(TraceErrorCode::duplicate_tag, raw.find(kTags[i], at + kTags[i].size()),
                            "repeated " + std::string(kTags[i]));
    }
  }
  // Opening tags without their closer are reported at the opener.
  constexpr std::array<std::pair<int, int>, 4> kPairs = {{{0, 5}, {1, 2}, {3, 4}, {6, 7}}};
  for (auto [open, close] : kPairs) {
    if (pos[open] != raw.npos && pos[close] == raw.npos) {
      throw TraceParseError(TraceErrorCode::unclosed_tag, pos[open],
                            std::string(kTags[open]) + " has no " + std::string(kTags[close]));
    }
  }
  for (std::size_t i = 0; i < kTags.size(); ++i) {
    if (pos[i] == raw.npos) {
      throw TraceParseError(TraceErrorCode::missing_tag, raw.size(), "missing " + std::string(kTags[i]));
    }
  }
  for (std::size_t i = 1; i < kTags.size(); ++i) {
    if (pos[i] < pos[i - 1] + kTags[i - 1].size()) {
      throw TraceParseError(TraceErrorCode::tag_order, pos[i],
                            std::string(kTags[i]) + " appears before the end of " + std::string(kTags[i - 1]));
    }
  }
  auto between = [&](std::size_t open, std::size_t close) {
    const std::size_t begin = pos[open] + kTags[open].size();
    return raw.substr(begin, pos[close] - begin);
  };
  const std::string plan_1 = canonical::trim(between(1, 2));
  const std::string plan_2 = canonical::trim(between(3, 4));
  if (plan_1.empty()) throw TraceParseError(TraceErrorCode::empty_plan, pos[1], "plan_1 is empty");
  if (plan_2.empty()) throw TraceParseError(TraceErrorCode::empty_plan, pos[3], "plan_2 is empty");

  const std::size_t actions_at = pos[6] + kTags[6].size();
  ordered_json actions;
  try {
    actions = ordered_json::parse(between(6, 7));
  } catch (const nlohmann::json::parse_error& e) {
    throw TraceParseError(TraceErrorCode::malformed_actions, actions_at + (e.byte > 0 ? e.byte - 1 : 0),
                          "actions payload is not JSON");
  }
  if (!actions.is_array()) {
    throw TraceParseError(TraceErrorCode::malformed_actions, actions_at, "actions payload is not a JSON array");
  }
  std::vector<ToolCall> calls;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    try {
      calls.push_back(ToolCall::from_json(actions[i]));
    } catch (const std::invalid_argument& e) {
      throw TraceParseError(TraceErrorCode::malformed_actions, actions_at,
                            "action " + std::to_string(i) + ": " + e.what());
    }
  }
  return PlanTrace::make(plan_1, plan_2, std::move(calls));
}

std::string serialize_plan_trace(const PlanTrace& t) {
  ordered_json actions = ordered_json::array();
  for (const auto& a : t.actions()) actions.push_back(a.to_json());
  std::string out;
  out += "<plans>\n<plan_1>\n" + t.plan_1() + "\n</plan_1>\n";
  out += "<plan_2>\n" + t.plan_2() + "\n</plan_2>\n</plans>\n";
  out += "<actions>\n" + actions.dump() + "\n</actions>\n";
  return out;
}

ValidationRules ValidationRules::defaults() {
  ValidationRules r;
  r.markers = {{"假设/可能", {"假设", "可能"}},
               {"这(个)说明", {"这个说明", "这说明"}},
               {"因此，我可以", {"因此，我可以", "因此,我可以"}}};
  r.sensitive_patterns = {
      R"([0-9]{7,})",
      R"((https?|ftp)://[^\s]+)",
      R"(www\.[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)+)",
      R"([A-Za-z0-9-]+\.(com|cn|net|org|io)\b)",
  };
  return r;
}

namespace {

// Earliest match of any alternate at or after `from`; npos if none.
std::pair<std::size_t, std::size_t> find_family(std::string_view text, const MarkerFamily& f, std::size_t from) {
  std::size_t best = text.npos, len = 0;
  for (const auto& alt : f.alternates) {
    const std::size_t at = text.find(alt, from);
    if (at < best) {
      best = at;
      len = alt.size();
    }
  }
  return {best, len};
}

}  // namespace

std::vector<Violation> validate_plan_trace(const PlanTrace& t, const ValidationRules& rules,
                                           std::string_view rationale) {
  std::vector<Violation> out;
  const std::string_view plan_2 = t.plan_2();
  std::size_t cursor = 0;
  for (const auto& family : rules.markers) {
    const auto [anywhere, _] = find_family(plan_2, family, 0);
    if (anywhere == plan_2.npos) {
      out.push_back({"missing_marker", "plan_2", family.name});
      continue;
    }
    const auto [at, len] = find_family(plan_2, family, cursor);
    if (at == plan_2.npos) {
      out.push_back({"marker_order", "plan_2", family.name});
      continue;
    }
    cursor = at + len;
  }
  for (const auto& pattern : rules.sensitive_patterns) {
    const std::regex re(pattern);
    for (auto [section, text] : {std::pair{"plan_1", std::string_view(t.plan_1())}, {"plan_2", plan_2}}) {
      std::match_results<std::string_view::const_iterator> m;
      if (std::regex_search(text.begin(), text.end(), m, re)) {
        out.push_back({"sensitive_data", section, pattern + " matched \"" + m.str() + "\""});
      }
    }
  }
  if (rules.require_rationale && canonical::trim(rationale).empty()) {
    out.push_back({"empty_rationale", "rationale", "rationale is required"});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cascade::trace
