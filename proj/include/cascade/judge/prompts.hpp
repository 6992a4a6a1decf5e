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
#include <map>
#include <string>
#include <vector>

namespace cascade::judge {

/// Prompt templates shipped as text assets. Slots are written {{name}}.
class PromptLibrary {
 public:
  /// Loads every *.txt in `dir`, keyed by file stem.
  static PromptLibrary load(const std::filesystem::path& dir);

  /// The assets directory baked in at build time, overridable with
  /// CASCADE_ASSETS_DIR.
  static std::filesystem::path default_assets_dir();

  bool contains(const std::string& name) const { return templates_.count(name) > 0; }
  const std::string& raw(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Substitutes {{key}} slots. Unknown slots are left in place.
  std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;

  void add(std::string name, std::string text) { templates_[std::move(name)] = std::move(text); }

 private:
  std::map<std::string, std::string> templates_;
};

}  // namespace cascade::judge
