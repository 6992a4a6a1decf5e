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

#include <iosfwd>
#include <string>
#include <vector>

namespace cascade::cli {

/// Exit codes. Each error class has its own code.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kSchema = 4,
  kBackend = 5,
  kCalibration = 6,
};

inline constexpr unsigned long long kDefaultSeed = 20240607ULL;

/// Runs one subcommand: calibrate, serve, score, build-multigt, eval-ecs,
/// augment, stats. `args[0]` is the program name. Human summaries go to
/// `out`; failures print a JSON error report to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cascade::cli
