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

#include "cascade/judge/ledger.hpp"

namespace cascade::judge {

void CallLedger::record(const std::string& backend, std::chrono::duration<double> latency,
                        bool failed) {
  std::lock_guard lock(mu_);
  auto& c = by_backend_[backend];
  ++c.calls;
  if (failed) ++c.failures;
  if (latency.count() > 0.0) c.total_latency_s += latency.count();
}

CallCounters CallLedger::counters(const std::string& backend) const {
  std::lock_guard lock(mu_);
  auto it = by_backend_.find(backend);
  return it == by_backend_.end() ? CallCounters{} : it->second;
}

std::map<std::string, CallCounters> CallLedger::snapshot() const {
  std::lock_guard lock(mu_);
  return by_backend_;
}

std::uint64_t CallLedger::total_calls() const {
  std::lock_guard lock(mu_);
  std::uint64_t n = 0;
  for (const auto& [_, c] : by_backend_) n += c.calls;
  return n;
}

}  // namespace cascade::judge
