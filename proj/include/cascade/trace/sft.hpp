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

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cascade/core/action.hpp"
#include "cascade/trace/plan_trace.hpp"
#include "cascade/trace/qc.hpp"
#include "json.hpp"

namespace cascade::trace {

/// (q_t, c_t, a_t): context, backward rationale, expert action.
struct DRARecord {
  std::string id;
  std::string query_context;
  std::string rationale;
  Candidate response;
};

/// Context, optional rationale and a planning trace.
struct PlanningRecord {
  std::string id;
  std::string query_context;
  std::string rationale;
  PlanTrace trace;
};

using SftInput = std::variant<DRARecord, PlanningRecord>;

enum class SftMode { decision, mix };

SftMode sft_mode_from_string(std::string_view s);

/// {"id", "type", "messages":[{"role":"user"}, {"role":"reasoning"}?, {"role":"assistant"}]}.
/// The rationale message always precedes the response.
nlohmann::ordered_json render_sft_record(const SftInput& in);

/// One output record per input. Decision mode keeps input order; mix mode
/// interleaves decision and planning records with a shuffle seeded by `seed`.
std::vector<nlohmann::ordered_json> build_sft_records(std::span<const SftInput> inputs, SftMode mode,
                                                      std::uint64_t seed);

/// Deterministic Fisher-Yates permutation of 0..n-1 driven by mt19937_64.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Raw teacher output row for augmentation:
/// {"id", "context", "type":"decision"|"planning", "rationale"?,
///  "response"?: candidate (decision), "trace"?: raw text (planning), "qc"?: [report...]}
struct TeacherOutput {
  SftInput record;
  std::vector<QcReport> qc;
};

TeacherOutput teacher_output_from_json(const nlohmann::ordered_json& row);

struct Rejection {
  std::string id;
  std::string reason;  // parse_error | validation | qc_gate
  std::vector<Violation> violations;
  std::string detail;

  nlohmann::ordered_json to_json() const;
};

struct AugmentResult {
  std::vector<nlohmann::ordered_json> records;
  std::vector<Rejection> rejected;
};

/// Parses, validates planning traces, gates by QC, then builds SFT records.
AugmentResult augment(std::span<const nlohmann::ordered_json> rows, const ValidationRules& rules,
                      const QcPolicy& policy, SftMode mode, std::uint64_t seed);

}  // namespace cascade::trace
