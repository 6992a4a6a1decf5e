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

#include <span>
#include <vector>

namespace cascade::calibrator {

struct Correlation {
  double rho = 0.0;
  bool degenerate = false;  // one side constant; rho reported as 0
};

/// Ranks 1..n with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation. A constant side yields {0, true}.
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Spearman's rho with average ranks. Throws std::invalid_argument on a
/// length mismatch or fewer than two values.
Correlation spearman(std::span<const double> a, std::span<const double> b);

inline double spearman_rho(std::span<const double> a, std::span<const double> b) {
  return spearman(a, b).rho;
}

}  // namespace cascade::calibrator
