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

#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

namespace cascade {

enum class ActionKind { tool_call, reply };

std::string_view to_string(ActionKind kind);
ActionKind action_kind_from_string(std::string_view s);

/// A tool invocation. Parameters keep their original key order so traces
/// re-serialize faithfully; equality goes through `canonical()`.
class ToolCall {
 public:
  ToolCall(std::string tool_name, nlohmann::ordered_json parameters);

  const std::string& tool_name() const { return tool_name_; }
  const nlohmann::ordered_json& parameters() const { return parameters_; }

  /// Byte string that is identical for exactly-matching calls: trimmed tool
  /// name, recursively key-sorted parameters, trimmed strings, normalized
  /// numbers, compact separators.
  const std::string& canonical() const { return canonical_; }

  nlohmann::ordered_json to_json() const;
  static ToolCall from_json(const nlohmann::ordered_json& j);

  friend bool operator==(const ToolCall& a, const ToolCall& b) {
    return a.canonical_ == b.canonical_;
  }

 private:
  std::string tool_name_;
  nlohmann::ordered_json parameters_;
  std::string canonical_;
};

/// One agent action: a textual reply or a tool call.
class Candidate {
 public:
  static Candidate reply(std::string text);
  static Candidate tool(ToolCall call);

  ActionKind kind() const {
    return std::holds_alternative<std::string>(payload_) ? ActionKind::reply
                                                         : ActionKind::tool_call;
  }
  const std::string& reply_text() const;
  const ToolCall& tool_call() const;

  /// Text shown to text judges (reply text, or the canonical tool call).
  std::string judge_text() const;

  /// Deduplication key: whitespace-normalized reply text or canonical call,
  /// prefixed by kind.
  std::string canonical_key() const;

  /// Wire form: {"kind":"reply","text":...} or {"kind":"tool_call","tool_call":{...}}.
  nlohmann::ordered_json to_json() const;
  static Candidate from_json(const nlohmann::ordered_json& j);

 private:
  explicit Candidate(std::variant<std::string, ToolCall> p) : payload_(std::move(p)) {}
  std::variant<std::string, ToolCall> payload_;
};

namespace canonical {

std::string trim(std::string_view s);
/// Trim and collapse internal whitespace runs to a single ASCII space.
std::string normalize_whitespace(std::string_view s);
/// Canonical compact serialization of a JSON value (see ToolCall::canonical).
std::string json_value(const nlohmann::ordered_json& v);

}  // namespace canonical

}  // namespace cascade
