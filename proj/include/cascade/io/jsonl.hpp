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

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cascade::io {

/// Streams a JSONL file, calling `on_row(row, line_number)` for each
/// non-blank line. Malformed JSON raises SchemaError with the line number;
/// exceptions from `on_row` are rethrown as SchemaError at that line unless
/// they already are one.
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const nlohmann::ordered_json&, std::size_t)>& on_row);

std::vector<nlohmann::ordered_json> read_jsonl(const std::filesystem::path& path);

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void write(const nlohmann::ordered_json& row);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cascade::io
