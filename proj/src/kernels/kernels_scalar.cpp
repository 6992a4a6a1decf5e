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

#include <algorithm>

#include "cascade/kernels/kernels.hpp"

namespace cascade::kernels::detail {
namespace {

void fuse_scalar(const double* s_r, const double* s_j, std::size_t n, FuseParams p, double* out,
                 std::uint8_t* region) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = s_r[i];
    std::uint8_t code = kFastPass;
    double r = s;
    if (s < p.tau_a) {
      code = kMixLow;
      r = p.w1 * s + (1.0 - p.w1) * s_j[i];
    } else if (s > p.tau_b) {
      code = kMixHigh;
      r = p.w2 * s + (1.0 - p.w2) * s_j[i];
    }
    out[i] = std::min(std::max(r, 0.0), 1.0);
    if (region) region[i] = code;
  }
}

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

Moments moments_scalar(const double* x, const double* y, std::size_t n, double mx, double my) {
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

const KernelTable scalar_table{Isa::scalar, &fuse_scalar, &sum_scalar, &moments_scalar};

}  // namespace cascade::kernels::detail
