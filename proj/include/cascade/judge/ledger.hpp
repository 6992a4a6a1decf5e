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

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>

namespace cascade::judge {

struct CallCounters {
  std::uint64_t calls = 0;
  std::uint64_t failures = 0;
  double total_latency_s = 0.0;
};

/// Per-backend call counters. Monotonic and safe for concurrent updates.
class CallLedger {
 public:
  void record(const std::string& backend, std::chrono::duration<double> latency, bool failed);

  CallCounters counters(const std::string& backend) const;
  std::map<std::string, CallCounters> snapshot() const;
  std::uint64_t total_calls() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, CallCounters> by_backend_;
};

}  // namespace cascade::judge
