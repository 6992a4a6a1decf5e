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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/calibrator/spearman.hpp"
#include "cascade/core/cascade.hpp"
#include "cascade/core/score.hpp"
#include "json.hpp"

namespace cascade::calibrator {

/// One held-out row: stored reranker and judge scores plus the teacher target.
struct EvalInstance {
  std::string id;
  Score s_r;
  Score s_j;
  Score teacher_y;
};

/// {id, s_r, s_j, teacher_y}; extra fields are ignored.
EvalInstance eval_instance_from_json(const nlohmann::ordered_json& row);
nlohmann::ordered_json to_json(const EvalInstance& e);
std::vector<EvalInstance> load_eval_instances(const std::filesystem::path& jsonl);

/// SHA-256 over ids and scores, in row order.
std::string data_fingerprint(std::span<const EvalInstance> data);

class SearchGrid {
 public:
  /// Both lists must be non-empty, strictly increasing and inside [0, 1].
  SearchGrid(std::vector<double> tau_values, std::vector<double> w_values);

  /// 0, step, 2*step, ... 1 for each axis. Default: 21 tau values, 11 weights.
  static SearchGrid uniform(double tau_step = 0.05, double w_step = 0.1);

  const std::vector<double>& tau_values() const { return tau_; }
  const std::vector<double>& w_values() const { return w_; }

  /// Half of the smallest gap between neighbours (0 for a single value).
  double tau_half_step() const;
  double w_half_step() const;

  /// Number of (tau_a, tau_b, w1, w2) points with tau_a <= tau_b.
  std::size_t point_count() const;

  nlohmann::ordered_json to_json() const;

 private:
  std::vector<double> tau_;
  std::vector<double> w_;
};

/// Spearman rho between cascade fused rewards (stored s_j, no backend calls)
/// and teacher scores. A constant fused vector is flagged with rho = 0.
Correlation evaluate_params(const CascadeParams& params, std::span<const EvalInstance> data);

struct FitOptions {
  bool refine = true;    // one half-step pass around the coarse optimum
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct CalibrationResult {
  CascadeParams params = CascadeParams::reference();
  double rho = 0.0;
  bool degenerate = false;  // fewer than three rows, or constant fused rewards at the optimum
  std::size_t grid_points_evaluated = 0;
  std::size_t fit_set_size = 0;
};

/// Strict preference between two scored points: higher rho, then (within
/// 1e-12) wider trust interval, then lexicographically smaller
/// (tau_a, tau_b, w1, w2).
bool preferred(double rho_a, const CascadeParams& a, double rho_b, const CascadeParams& b);

inline constexpr double kRhoTieTolerance = 1e-12;

/// Exhaustive grid search (tau_a <= tau_b) plus optional refinement.
/// Parallel over grid points; the reduction runs in grid order so the result
/// is independent of the thread count. Throws std::invalid_argument if data
/// is empty or the filtered grid is empty.
CalibrationResult fit_cascade(std::span<const EvalInstance> data, const SearchGrid& grid,
                              FitOptions options = {});

/// Calibration artifact: JSON text with params, rho, grid, data fingerprint
/// and a timestamp (SOURCE_DATE_EPOCH when set).
struct CalibrationArtifact {
  CalibrationResult result;
  nlohmann::ordered_json grid;
  std::string data_fingerprint;
  std::string created_at;
};

nlohmann::ordered_json to_json(const CalibrationArtifact& a);
CalibrationArtifact artifact_from_json(const nlohmann::ordered_json& j);
void write_artifact(const std::filesystem::path& path, const CalibrationArtifact& a);
CalibrationArtifact read_artifact(const std::filesystem::path& path);

/// UTC ISO-8601 timestamp, from SOURCE_DATE_EPOCH if set.
std::string timestamp_now();

nlohmann::ordered_json params_to_json(const CascadeParams& p);
CascadeParams params_from_json(const nlohmann::ordered_json& j);

}  // namespace cascade::calibrator
