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

#include <cstddef>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cascade/core/action.hpp"

namespace cascade::trace {

/// Planning trace: two plan sections and the extracted tool calls.
class PlanTrace {
 public:
  /// Trims both plans. Throws std::invalid_argument if a plan is empty or
  /// contains one of the trace tags.
  static PlanTrace make(std::string plan_1, std::string plan_2, std::vector<ToolCall> actions = {});

  const std::string& plan_1() const { return plan_1_; }
  const std::string& plan_2() const { return plan_2_; }
  const std::vector<ToolCall>& actions() const { return actions_; }

  friend bool operator==(const PlanTrace&, const PlanTrace&) = default;

 private:
  PlanTrace() = default;
  std::string plan_1_;
  std::string plan_2_;
  std::vector<ToolCall> actions_;
};

enum class TraceErrorCode { missing_tag, duplicate_tag, unclosed_tag, tag_order, empty_plan, malformed_actions };

std::string_view to_string(TraceErrorCode code);

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(TraceErrorCode code, std::size_t offset, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + " at byte " + std::to_string(offset) + ": " + what),
        code_(code),
        offset_(offset) {}

  TraceErrorCode code() const { return code_; }
  std::size_t offset() const { return offset_; }

 private:
  TraceErrorCode code_;
  std::size_t offset_;
};

/// Parses "<plans><plan_1>..</plan_1><plan_2>..</plan_2></plans><actions>[..]</actions>".
/// Each action is {tool_name, parameters} with an optional "action" label.
PlanTrace parse_plan_trace(std::string_view raw);

/// Canonical text form; parse_plan_trace(serialize_plan_trace(t)) == t.
std::string serialize_plan_trace(const PlanTrace& t);

struct MarkerFamily {
  std::string name;
  std::vector<std::string> alternates;
};

struct ValidationRules {
  /// Must appear in plan_2 in this order.
  std::vector<MarkerFamily> markers;
  /// ECMAScript regexes; a match anywhere in a plan is an anonymization violation.
  std::vector<std::string> sensitive_patterns;
  bool require_rationale = false;

  static ValidationRules defaults();
};

struct Violation {
  std::string rule;     // missing_marker | marker_order | sensitive_data | empty_rationale
  std::string section;  // plan_1 | plan_2 | rationale
  std::string detail;

  friend auto operator<=>(const Violation&, const Violation&) = default;
};

/// Violations sorted by (rule, section, detail); empty means valid.
std::vector<Violation> validate_plan_trace(const PlanTrace& t, const ValidationRules& rules,
                                           std::string_view rationale = {});

}  // namespace cascade::trace
