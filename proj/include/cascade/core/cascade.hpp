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

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cascade/core/action.hpp"
#include "cascade/core/score.hpp"

namespace cascade {

/// Trust interval [tau_a, tau_b] plus the mixing weights applied below (w1)
/// and above (w2) it.
class CascadeParams {
 public:
  CascadeParams(double tau_a, double tau_b, double w1, double w2);

  /// Fast interval [0.68, 0.98], w1 = 0.05, w2 = 0.72.
  static CascadeParams reference();

  double tau_a() const { return tau_a_.value(); }
  double tau_b() const { return tau_b_.value(); }
  double w1() const { return w1_; }
  double w2() const { return w2_; }

  /// Stable text form used in cache keys and artifacts.
  std::string fingerprint() const;

  friend bool operator==(const CascadeParams&, const CascadeParams&) = default;

 private:
  Score tau_a_;
  Score tau_b_;
  double w1_;
  double w2_;
};

enum class Region { mix_low, fast_pass, mix_high };

std::string_view to_string(Region region);
Region region_from_string(std::string_view s);

inline Region classify(double s_r, const CascadeParams& p) {
  if (s_r < p.tau_a()) return Region::mix_low;
  if (s_r > p.tau_b()) return Region::mix_high;
  return Region::fast_pass;
}

/// How a candidate was scored.
enum class ScoringPath { action_mismatch, tool_exact_match, cascade };

std::string_view to_string(ScoringPath path);

struct RoutingOutcome {
  ScoringPath path = ScoringPath::cascade;
  Region region = Region::fast_pass;  // meaningful only for ScoringPath::cascade
  Score reward;
  bool judge_invoked = false;
};

/// Raised when the judge was required but failed. Carries the region that
/// demanded the judge.
class ScoringError : public std::runtime_error {
 public:
  ScoringError(Region region, const std::string& what)
      : std::runtime_error(what), region_(region) {}
  Region region() const { return region_; }

 private:
  Region region_;
};

using LazyScore = std::function<Score()>;

/// Single-interval cascade. The judge callback is invoked at most once and
/// only outside the closed trust interval.
RoutingOutcome route_and_fuse(Score s_r, const LazyScore& judge, const CascadeParams& params);

/// Mixed reward for a region outside the trust interval; fast_pass returns s_r.
double fuse(Region region, double s_r, double s_j, const CascadeParams& params);

/// 1.0 iff some reference is the same call under canonical comparison.
Score score_tool_call(const ToolCall& candidate, std::span<const ToolCall> references);

/// Text scorer over (context, candidate, reference). Implemented by the
/// reranker and judge clients, and by mocks.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual Score score(std::string_view context, std::string_view candidate,
                      std::string_view reference) const = 0;
};

struct ScoringContext {
  std::string_view context;
  const PairScorer& reranker;
  const PairScorer& judge;
  const CascadeParams& params;
  bool force_judge = false;
};

/// Full reward dispatch: zero on action-type mismatch, exact matching for
/// tool calls, cascade over max-per-reference scores for replies. The judge
/// is only consulted when the region requires it. With force_judge the judge
/// runs for every routed reply and its score becomes the reward (judge-always
/// audit); the region is still reported.
RoutingOutcome reward(const Candidate& candidate, std::span<const Candidate> references,
                      const ScoringContext& scorers);

}  // namespace cascade
