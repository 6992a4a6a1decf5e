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
#include <span>

#include "cascade/core/cascade.hpp"

namespace cascade::service {

struct LatencyWeights {
  double reranker = 1.0;
  double judge = 10.0;
};

/// Expected cascade reward time over judge-always reward time when a
/// fraction `fast_pass` of replies skips the judge.
double closed_form_time_ratio(double fast_pass, LatencyWeights w = {});

struct ReplayResult {
  double cascade_makespan = 0.0;
  double baseline_makespan = 0.0;
  double ratio = 0.0;
  double fast_pass_fraction = 0.0;
  std::size_t judge_calls = 0;
};

/// Discrete-event replay on a simulated clock: `workers` reward workers
/// take items in order; each item costs one reranker call, plus a judge call
/// unless it was a fast pass. The baseline pays both calls for every item.
ReplayResult replay_reward_time(std::span<const Region> regions, LatencyWeights w = {}, unsigned workers = 1);

}  // namespace cascade::service
