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

#include "cascade/core/action.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cascade {

using nlohmann::ordered_json;

std::string_view to_string(ActionKind kind) {
  return kind == ActionKind::reply ? "reply" : "tool_call";
}

ActionKind action_kind_from_string(std::string_view s) {
  if (s == "reply") return ActionKind::reply;
  if (s == "tool_call" || s == "call_tool") return ActionKind::tool_call;
  throw std::invalid_argument("unknown action kind: " + std::string(s));
}

namespace canonical {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// 2^53: every integer of smaller magnitude is exactly representable.
constexpr double kExactIntegerLimit = 9007199254740992.0;

void append_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  if (v == std::floor(v) && std::fabs(v) < kExactIntegerLimit) {
    out += std::to_string(static_cast<long long>(v));
    return;
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void append(std::string& out, const ordered_json& v) {
  switch (v.type()) {
    case ordered_json::value_t::object: {
      std::vector<std::string> keys;
      keys.reserve(v.size());
      for (const auto& [k, _] : v.items()) keys.push_back(k);
      std::sort(keys.begin(), keys.end());
      out += '{';
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i) out += ',';
        out += ordered_json(keys[i]).dump();
        out += ':';
        append(out, v.at(keys[i]));
      }
      out += '}';
      break;
    }
    case ordered_json::value_t::array:
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        append(out, v[i]);
      }
      out += ']';
      break;
    case ordered_json::value_t::string:
      out += ordered_json(trim(v.get_ref<const std::string&>())).dump();
      break;
    case ordered_json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case ordered_json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case ordered_json::value_t::number_float:
      append_number(out, v.get<double>());
      break;
    case ordered_json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    default:
      out += "null";
  }
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

std::string json_value(const ordered_json& v) {
  std::string out;
  append(out, v);
  return out;
}

}  // namespace canonical

ToolCall::ToolCall(std::string tool_name, ordered_json parameters)
    : tool_name_(canonical::trim(tool_name)), parameters_(std::move(parameters)) {
  if (tool_name_.empty()) throw std::invalid_argument("tool_name must be non-empty");
  if (parameters_.is_null()) parameters_ = ordered_json::object();
  if (!parameters_.is_object()) throw std::invalid_argument("tool parameters must be a JSON object");
  canonical_ = ordered_json(tool_name_).dump() + "(" + canonical::json_value(parameters_) + ")";
}

ordered_json ToolCall::to_json() const {
  ordered_json j;
  j["tool_name"] = tool_name_;
  j["parameters"] = parameters_;
  return j;
}

ToolCall ToolCall::from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("tool call must be a JSON object");
  auto name = j.find("tool_name");
  if (name == j.end() || !name->is_string()) {
    throw std::invalid_argument("tool call needs a string \"tool_name\"");
  }
  auto params = j.find("parameters");
  return ToolCall(name->get<std::string>(),
                  params == j.end() ? ordered_json::object() : *params);
}

Candidate Candidate::reply(std::string text) {
  return Candidate(std::variant<std::string, ToolCall>(std::in_place_index<0>, std::move(text)));
}

Candidate Candidate::tool(ToolCall call) {
  return Candidate(std::variant<std::string, ToolCall>(std::in_place_index<1>, std::move(call)));
}

const std::string& Candidate::reply_text() const {
  if (auto* s = std::get_if<std::string>(&payload_)) return *s;
  throw std::logic_error("candidate is a tool call, not a reply");
}

const ToolCall& Candidate::tool_call() const {
  if (auto* t = std::get_if<ToolCall>(&payload_)) return *t;
  throw std::logic_error("candidate is a reply, not a tool call");
}

std::string Candidate::judge_text() const {
  if (kind() == ActionKind::reply) return reply_text();
  return "call_tool " + tool_call().canonical();
}

std::string Candidate::canonical_key() const {
  if (kind() == ActionKind::reply) return "reply:" + canonical::normalize_whitespace(reply_text());
  return "tool:" + tool_call().canonical();
}

ordered_json Candidate::to_json() const {
  ordered_json j;
  j["kind"] = std::string(to_string(kind()));
  if (kind() == ActionKind::reply) {
    j["text"] = reply_text();
  } else {
    j["tool_call"] = tool_call().to_json();
  }
  return j;
}

Candidate Candidate::from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("candidate must be a JSON object");
  auto kind_it = j.find("kind");
  if (kind_it == j.end() || !kind_it->is_string()) {
    throw std::invalid_argument("candidate needs a string \"kind\"");
  }
  const ActionKind kind = action_kind_from_string(kind_it->get<std::string>());
  if (kind == ActionKind::reply) {
    if (j.contains("tool_call")) throw std::invalid_argument("reply candidate carries a tool_call");
    auto text = j.find("text");
    if (text == j.end() || !text->is_string()) {
      throw std::invalid_argument("reply candidate needs a string \"text\"");
    }
    return reply(text->get<std::string>());
  }
  if (j.contains("text")) throw std::invalid_argument("tool_call candidate carries text");
  auto call = j.find("tool_call");
  if (call == j.end()) throw std::invalid_argument("tool_call candidate needs \"tool_call\"");
  return tool(ToolCall::from_json(*call));
}

}  // namespace cascade
