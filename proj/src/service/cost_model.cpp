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

#include "cascade/service/cost_model.hpp"

#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace cascade::service {

double closed_form_time_ratio(double fast_pass, LatencyWeights w) {
  const double full = w.reranker + w.judge;
  return ((1.0 - fast_pass) * full + fast_pass * w.reranker) / full;
}

namespace {

// Each worker is a completion time on the simulated clock; the next item
// starts on whichever worker frees up first.
double makespan(std::span<const double> durations, unsigned workers) {
  std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
  for (unsigned i = 0; i < workers; ++i) free_at.push(0.0);
  double end = 0.0;
  for (double d : durations) {
    const double start = free_at.top();
    free_at.pop();
    const double done = start + d;
    end = std::max(end, done);
    free_at.push(done);
  }
  return end;
}

}  // namespace

ReplayResult replay_reward_time(std::span<const Region> regions, LatencyWeights w, unsigned workers) {
  if (workers == 0) throw std::invalid_argument("replay needs at least one worker");
  ReplayResult r;
  std::vector<double> cascade, baseline;
  cascade.reserve(regions.size());
  baseline.assign(regions.size(), w.reranker + w.judge);
  std::size_t fast = 0;
  for (Region g : regions) {
    if (g == Region::fast_pass) {
      ++fast;
      cascade.push_back(w.reranker);
    } else {
      ++r.judge_calls;
      cascade.push_back(w.reranker + w.judge);
    }
  }
  r.cascade_makespan = makespan(cascade, workers);
  r.baseline_makespan = makespan(baseline, workers);
  r.ratio = r.baseline_makespan > 0.0 ? r.cascade_makespan / r.baseline_makespan : 1.0;
  r.fast_pass_fraction = regions.empty() ? 0.0 : static_cast<double>(fast) / static_cast<double>(regions.size());
  return r;
}

}  // namespace cascade::service
