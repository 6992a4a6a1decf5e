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

#include "cascade/io/jsonl.hpp"

#include <sstream>

#include "cascade/io/errors.hpp"

namespace cascade::io {

void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const nlohmann::ordered_json&, std::size_t)>& on_row) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::ordered_json row;
    try {
      row = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(path.string(), line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      on_row(row, line_no);
    } catch (const SchemaError&) {
      throw;
    } catch (const IoError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path.string(), line_no, e.what());
    } catch (const std::out_of_range& e) {
      throw SchemaError(path.string(), line_no, e.what());
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.string(), line_no, e.what());
    }
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
}

std::vector<nlohmann::ordered_json> read_jsonl(const std::filesystem::path& path) {
  std::vector<nlohmann::ordered_json> rows;
  read_jsonl(path, [&](const nlohmann::ordered_json& row, std::size_t) { rows.push_back(row); });
  return rows;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path), out_(path) {
  if (!out_) throw IoError("cannot open for writing: " + path.string());
}

void JsonlWriter::write(const nlohmann::ordered_json& row) {
  out_ << row.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  if (!out_) throw IoError("write failed: " + path_.string());
}

void JsonlWriter::close() {
  out_.close();
  if (out_.fail()) throw IoError("close failed: " + path_.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  out.close();
  if (out.fail()) throw IoError("write failed: " + path.string());
}

}  // namespace cascade::io
