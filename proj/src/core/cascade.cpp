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

#include "cascade/core/cascade.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <vector>

namespace cascade {

CascadeParams::CascadeParams(double tau_a, double tau_b, double w1, double w2)
    : tau_a_(Score::of(tau_a)), tau_b_(Score::of(tau_b)), w1_(w1), w2_(w2) {
  if (tau_a > tau_b) throw std::invalid_argument("cascade params need tau_a <= tau_b");
  if (!(w1 >= 0.0 && w1 <= 1.0) || !(w2 >= 0.0 && w2 <= 1.0)) {
    throw std::invalid_argument("cascade mixing weights must lie in [0, 1]");
  }
}

CascadeParams CascadeParams::reference() { return CascadeParams(0.68, 0.98, 0.05, 0.72); }

std::string CascadeParams::fingerprint() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "tau_a=%.17g;tau_b=%.17g;w1=%.17g;w2=%.17g", tau_a(), tau_b(),
                w1_, w2_);
  return buf;
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::mix_low:
      return "mix_low";
    case Region::fast_pass:
      return "fast_pass";
    case Region::mix_high:
      return "mix_high";
  }
  return "unknown";
}

Region region_from_string(std::string_view s) {
  if (s == "mix_low") return Region::mix_low;
  if (s == "fast_pass") return Region::fast_pass;
  if (s == "mix_high") return Region::mix_high;
  throw std::invalid_argument("unknown region: " + std::string(s));
}

std::string_view to_string(ScoringPath path) {
  switch (path) {
    case ScoringPath::action_mismatch:
      return "action_mismatch";
    case ScoringPath::tool_exact_match:
      return "tool_exact_match";
    case ScoringPath::cascade:
      return "cascade";
  }
  return "unknown";
}

double fuse(Region region, double s_r, double s_j, const CascadeParams& p) {
  switch (region) {
    case Region::mix_low:
      return p.w1() * s_r + (1.0 - p.w1()) * s_j;
    case Region::mix_high:
      return p.w2() * s_r + (1.0 - p.w2()) * s_j;
    case Region::fast_pass:
      break;
  }
  return s_r;
}

namespace {

Score invoke_judge(const LazyScore& judge, Region region) {
  try {
    return judge();
  } catch (const ScoringError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScoringError(region, std::string("judge failed in ") + std::string(to_string(region)) +
                                   ": " + e.what());
  }
}

}  // namespace

RoutingOutcome route_and_fuse(Score s_r, const LazyScore& judge, const CascadeParams& params) {
  const Region region = classify(s_r.value(), params);
  if (region == Region::fast_pass) return {ScoringPath::cascade, region, s_r, false};
  const Score s_j = invoke_judge(judge, region);
  return {ScoringPath::cascade, region,
          Score::clamped(fuse(region, s_r.value(), s_j.value(), params)), true};
}

Score score_tool_call(const ToolCall& candidate, std::span<const ToolCall> references) {
  for (const auto& ref : references) {
    if (ref == candidate) return Score::one();
  }
  return Score::zero();
}

RoutingOutcome reward(const Candidate& candidate, std::span<const Candidate> references,
                      const ScoringContext& scorers) {
  std::vector<const Candidate*> same_kind;
  for (const auto& ref : references) {
    if (ref.kind() == candidate.kind()) same_kind.push_back(&ref);
  }
  if (same_kind.empty()) return {ScoringPath::action_mismatch, Region::fast_pass, Score::zero(), false};

  if (candidate.kind() == ActionKind::tool_call) {
    std::vector<ToolCall> calls;
    calls.reserve(same_kind.size());
    for (const auto* ref : same_kind) calls.push_back(ref->tool_call());
    return {ScoringPath::tool_exact_match, Region::fast_pass,
            score_tool_call(candidate.tool_call(), calls), false};
  }

  const std::string& text = candidate.reply_text();
  Score s_r = Score::zero();
  for (const auto* ref : same_kind) {
    s_r = std::max(s_r, scorers.reranker.score(scorers.context, text, ref->reply_text()));
  }
  const LazyScore judge = [&] {
    Score best = Score::zero();
    for (const auto* ref : same_kind) {
      best = std::max(best, scorers.judge.score(scorers.context, text, ref->reply_text()));
    }
    return best;
  };
  if (!scorers.force_judge) return route_and_fuse(s_r, judge, scorers.params);

  const Region region = classify(s_r.value(), scorers.params);
  return {ScoringPath::cascade, region, invoke_judge(judge, region), true};
}

}  // namespace cascade
