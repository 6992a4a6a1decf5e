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
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cascade::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct FuseParams {
  double tau_a;
  double tau_b;
  double w1;
  double w2;
};

// Region codes written by fuse; same order as cascade::Region.
inline constexpr std::uint8_t kMixLow = 0;
inline constexpr std::uint8_t kFastPass = 1;
inline constexpr std::uint8_t kMixHigh = 2;

struct Moments {
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

struct KernelTable {
  Isa isa;
  // out[i] = clamp(cascade fused reward); region[i] = region code. region may be null.
  void (*fuse)(const double* s_r, const double* s_j, std::size_t n, FuseParams p, double* out,
               std::uint8_t* region);
  double (*sum)(const double* x, std::size_t n);
  // Sums of (x-mx)^2, (y-my)^2, (x-mx)(y-my).
  Moments (*centered_moments)(const double* x, const double* y, std::size_t n, double mx,
                              double my);
};

/// True if this binary carries the variant and the CPU can run it.
bool supported(Isa isa);

/// The variant table; throws std::runtime_error if unsupported.
const KernelTable& table(Isa isa);

/// Best supported variant, unless CASCADE_KERNELS=scalar|avx2 overrides it.
const KernelTable& active();

// Convenience wrappers over active().
void fuse(std::span<const double> s_r, std::span<const double> s_j, FuseParams p,
          std::span<double> out, std::span<std::uint8_t> region = {});
double sum(std::span<const double> x);
Moments centered_moments(std::span<const double> x, std::span<const double> y, double mx,
                         double my);

namespace detail {
extern const KernelTable scalar_table;
#if defined(CASCADE_HAVE_AVX2_KERNELS)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace cascade::kernels
