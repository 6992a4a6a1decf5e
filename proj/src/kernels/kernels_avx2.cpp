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

// Built with -mavx2 (no -mfma): mul/add stay separate so fused rewards are
// bit-identical to the scalar variant.
#include <immintrin.h>

#include <algorithm>

#include "cascade/kernels/kernels.hpp"

namespace cascade::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

void fuse_avx2(const double* s_r, const double* s_j, std::size_t n, FuseParams p, double* out,
               std::uint8_t* region) {
  const __m256d tau_a = _mm256_set1_pd(p.tau_a);
  const __m256d tau_b = _mm256_set1_pd(p.tau_b);
  const __m256d w1 = _mm256_set1_pd(p.w1);
  const __m256d w2 = _mm256_set1_pd(p.w2);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_loadu_pd(s_r + i);
    const __m256d j = _mm256_loadu_pd(s_j + i);
    const __m256d low = _mm256_cmp_pd(s, tau_a, _CMP_LT_OQ);
    const __m256d high = _mm256_cmp_pd(s, tau_b, _CMP_GT_OQ);
    const __m256d w = _mm256_blendv_pd(w1, w2, high);
    const __m256d mixed =
        _mm256_add_pd(_mm256_mul_pd(w, s), _mm256_mul_pd(_mm256_sub_pd(one, w), j));
    const __m256d chosen = _mm256_blendv_pd(s, mixed, _mm256_or_pd(low, high));
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_max_pd(chosen, zero), one));
    if (region) {
      const int lo_bits = _mm256_movemask_pd(low);
      const int hi_bits = _mm256_movemask_pd(high);
      for (int k = 0; k < 4; ++k) {
        region[i + k] = (lo_bits >> k) & 1 ? kMixLow : ((hi_bits >> k) & 1 ? kMixHigh : kFastPass);
      }
    }
  }
  for (; i < n; ++i) {
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

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

Moments moments_avx2(const double* x, const double* y, std::size_t n, double mx, double my) {
  const __m256d vmx = _mm256_set1_pd(mx);
  const __m256d vmy = _mm256_set1_pd(my);
  __m256d sxx = _mm256_setzero_pd();
  __m256d syy = _mm256_setzero_pd();
  __m256d sxy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vmy);
    sxx = _mm256_add_pd(sxx, _mm256_mul_pd(dx, dx));
    syy = _mm256_add_pd(syy, _mm256_mul_pd(dy, dy));
    sxy = _mm256_add_pd(sxy, _mm256_mul_pd(dx, dy));
  }
  Moments m{hsum(sxx), hsum(syy), hsum(sxy)};
  for (; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

const KernelTable avx2_table{Isa::avx2, &fuse_avx2, &sum_avx2, &moments_avx2};

}  // namespace cascade::kernels::detail
