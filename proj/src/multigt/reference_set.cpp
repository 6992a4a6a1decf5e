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

#include "cascade/multigt/reference_set.hpp"

#include <set>
#include <stdexcept>

#include "cascade/judge/verdict.hpp"

namespace cascade::multigt {

using nlohmann::ordered_json;

std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::logged_original:
      return "logged_original";
    case SourceTag::online_consistency:
      return "online_consistency";
    case SourceTag::offline_consistency:
      return "offline_consistency";
    case SourceTag::utility:
      return "utility";
  }
  return "unknown";
}

SourceTag source_tag_from_string(std::string_view s) {
  if (s == "logged_original") return SourceTag::logged_original;
  if (s == "online_consistency") return SourceTag::online_consistency;
  if (s == "offline_consistency") return SourceTag::offline_consistency;
  if (s == "utility") return SourceTag::utility;
  throw std::invalid_argument("unknown source_tag: " + std::string(s));
}

std::string_view to_string(Origin origin) {
  return origin == Origin::online_rollout ? "online_rollout" : "offline_exploration";
}

Origin origin_from_string(std::string_view s) {
  if (s == "online_rollout" || s == "online") return Origin::online_rollout;
  if (s == "offline_exploration" || s == "offline") return Origin::offline_exploration;
  throw std::invalid_argument("unknown origin: " + std::string(s));
}

ReferenceSet::ReferenceSet(std::string query_id, std::string context, std::vector<Reference> refs,
                           std::optional<std::string> ticket_summary)
    : query_id_(std::move(query_id)),
      context_(std::move(context)),
      ticket_summary_(std::move(ticket_summary)) {
  bool has_original = false;
  std::set<std::string> keys;
  for (auto& r : refs) {
    if (!keys.insert(r.candidate.canonical_key()).second) {
      throw std::invalid_argument("reference set " + query_id_ + " has duplicate references");
    }
    has_original |= r.tag == SourceTag::logged_original;
    refs_.push_back(std::move(r));
  }
  if (!has_original) {
    throw std::invalid_argument("reference set " + query_id_ + " has no logged_original reference");
  }
}

const Reference& ReferenceSet::logged_original() const {
  for (const auto& r : refs_) {
    if (r.tag == SourceTag::logged_original) return r;
  }
  throw std::logic_error("reference set without logged_original");
}

bool ReferenceSet::contains(const Candidate& c) const {
  const std::string key = c.canonical_key();
  for (const auto& r : refs_) {
    if (r.candidate.canonical_key() == key) return true;
  }
  return false;
}

bool ReferenceSet::add(Reference r) {
  if (contains(r.candidate)) return false;
  refs_.push_back(std::move(r));
  return true;
}

std::vector<Candidate> ReferenceSet::candidates() const {
  std::vector<Candidate> out;
  out.reserve(refs_.size());
  for (const auto& r : refs_) out.push_back(r.candidate);
  return out;
}

ordered_json ReferenceSet::to_json() const {
  ordered_json j;
  j["query_id"] = query_id_;
  j["context"] = context_;
  if (ticket_summary_) j["ticket_summary"] = *ticket_summary_;
  ordered_json refs = ordered_json::array();
  for (const auto& r : refs_) {
    ordered_json e = r.candidate.to_json();
    e["source_tag"] = std::string(to_string(r.tag));
    refs.push_back(std::move(e));
  }
  j["references"] = std::move(refs);
  return j;
}

namespace {

std::string string_field(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw std::invalid_argument(std::string("missing string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

// Strips extra fields so Candidate::from_json sees only its wire form.
ordered_json candidate_part(const ordered_json& e) {
  ordered_json c;
  for (const char* k : {"kind", "text", "tool_call"}) {
    if (auto it = e.find(k); it != e.end()) c[k] = *it;
  }
  return c;
}

}  // namespace

ReferenceSet ReferenceSet::from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("reference set must be a JSON object");
  auto refs_it = j.find("references");
  if (refs_it == j.end() || !refs_it->is_array()) {
    throw std::invalid_argument("reference set needs a \"references\" array");
  }
  std::vector<Reference> refs;
  for (const auto& e : *refs_it) {
    if (!e.is_object()) throw std::invalid_argument("reference must be a JSON object");
    refs.push_back({Candidate::from_json(candidate_part(e)),
                    source_tag_from_string(e.value("source_tag", std::string("logged_original")))});
  }
  std::optional<std::string> summary;
  if (auto it = j.find("ticket_summary"); it != j.end() && it->is_string()) summary = it->get<std::string>();
  return ReferenceSet(string_field(j, "query_id"), j.value("context", std::string()), std::move(refs),
                      std::move(summary));
}

ordered_json CandidateBatch::to_json() const {
  ordered_json j;
  j["query_id"] = query_id;
  j["origin"] = std::string(to_string(origin));
  ordered_json cands = ordered_json::array();
  for (const auto& c : candidates) {
    ordered_json e = c.candidate.to_json();
    if (c.recorded.consistent || c.recorded.useful) {
      ordered_json rec;
      if (c.recorded.consistent) rec["consistency"] = *c.recorded.consistent ? "一致" : "不一致";
      if (c.recorded.useful) rec["utility"] = *c.recorded.useful ? "可用" : "不可用";
      e["recorded"] = std::move(rec);
    }
    cands.push_back(std::move(e));
  }
  j["candidates"] = std::move(cands);
  return j;
}

CandidateBatch CandidateBatch::from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("candidate batch must be a JSON object");
  CandidateBatch b;
  b.query_id = string_field(j, "query_id");
  b.origin = origin_from_string(string_field(j, "origin"));
  auto it = j.find("candidates");
  if (it == j.end() || !it->is_array()) throw std::invalid_argument("candidate batch needs a \"candidates\" array");
  for (const auto& e : *it) {
    if (!e.is_object()) throw std::invalid_argument("candidate must be a JSON object");
    BatchCandidate c{Candidate::from_json(candidate_part(e)), {}};
    if (auto rec = e.find("recorded"); rec != e.end()) {
      if (!rec->is_object()) throw std::invalid_argument("\"recorded\" must be an object");
      if (auto v = rec->find("consistency"); v != rec->end()) {
        c.recorded.consistent =
            judge::parse_consistency_level(v->get<std::string>()) == judge::ConsistencyLevel::consistent;
      }
      if (auto v = rec->find("utility"); v != rec->end()) {
        c.recorded.useful = judge::parse_utility_report(ordered_json{{"judge_result", *v}});
      }
    }
    b.candidates.push_back(std::move(c));
  }
  return b;
}

}  // namespace cascade::multigt
