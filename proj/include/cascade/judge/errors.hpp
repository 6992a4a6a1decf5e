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

#include <stdexcept>
#include <string>
#include <string_view>

namespace cascade::judge {

enum class BackendErrorKind { timeout, transport, malformed_payload };

std::string_view to_string(BackendErrorKind kind);

/// A backend call failed. All kinds are retry-eligible under RetryPolicy.
class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, std::string backend, const std::string& what)
      : std::runtime_error(backend + " [" + std::string(to_string(kind)) + "]: " + what),
        kind_(kind),
        backend_(std::move(backend)) {}

  BackendErrorKind kind() const { return kind_; }
  const std::string& backend() const { return backend_; }

 private:
  BackendErrorKind kind_;
  std::string backend_;
};

/// Backend answered, but the payload does not match the expected schema.
/// The raw payload is kept for audit.
class ParseError : public BackendError {
 public:
  ParseError(std::string backend, const std::string& what, std::string raw_payload)
      : BackendError(BackendErrorKind::malformed_payload, std::move(backend), what),
        raw_payload_(std::move(raw_payload)) {}

  const std::string& raw_payload() const { return raw_payload_; }

 private:
  std::string raw_payload_;
};

}  // namespace cascade::judge
