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

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "cascade/kernels/kernels.hpp"

namespace cascade::kernels {

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(CASCADE_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw std::runtime_error("kernel variant not available: " + std::string(to_string(isa)));
  }
#if defined(CASCADE_HAVE_AVX2_KERNELS)
  if (isa == Isa::avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("CASCADE_KERNELS")) {
    const std::string name(forced);
    if (name == "scalar") return table(Isa::scalar);
    if (name == "avx2") return table(Isa::avx2);
    throw std::runtime_error("CASCADE_KERNELS must be scalar or avx2, got " + name);
  }
  return supported(Isa::avx2) ? table(Isa::avx2) : table(Isa::scalar);
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

void fuse(std::span<const double> s_r, std::span<const double> s_j, FuseParams p,
          std::span<double> out, std::span<std::uint8_t> region) {
  if (s_j.size() != s_r.size() || out.size() != s_r.size() ||
      (!region.empty() && region.size() != s_r.size())) {
    throw std::invalid_argument("fuse: span sizes differ");
  }
  active().fuse(s_r.data(), s_j.data(), s_r.size(), p, out.data(),
                region.empty() ? nullptr : region.data());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

Moments centered_moments(std::span<const double> x, std::span<const double> y, double mx,
                         double my) {
  if (x.size() != y.size()) throw std::invalid_argument("centered_moments: span sizes differ");
  return active().centered_moments(x.data(), y.data(), x.size(), mx, my);
}

}  // namespace cascade::kernels
