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

#include <algorithm>
#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace cascade {

/// A reward or judge score in the closed unit interval.
///
/// Construction through `Score::of` rejects values outside [0, 1] (and NaN);
/// `Score::clamped` is for arithmetic results that may drift by an ulp.
class Score {
 public:
  constexpr Score() = default;

  static Score of(double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw std::out_of_range("score outside [0, 1]: " + std::to_string(value));
    }
    return Score(value);
  }

  static Score clamped(double value) {
    if (std::isnan(value)) throw std::out_of_range("score is NaN");
    return Score(std::clamp(value, 0.0, 1.0));
  }

  static constexpr Score zero() { return Score(0.0); }
  static constexpr Score one() { return Score(1.0); }

  constexpr double value() const { return value_; }

  friend constexpr auto operator<=>(Score, Score) = default;

 private:
  constexpr explicit Score(double v) : value_(v) {}
  double value_ = 0.0;
};

}  // namespace cascade
