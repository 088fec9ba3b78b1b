// Copyright 2026 The NuExo Teleop Authors
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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace nuexo {

/// Flat `key = value` configuration file. Lines starting with '#' are
/// comments, trailing '# ...' comments are stripped. Keys are unique.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  static ConfigFile load(const std::filesystem::path& path);
  static ConfigFile parse(std::string_view text, std::string source = "<string>");

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& source() const { return source_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  /// Comma-separated list of numbers; a single number is a list of one.
  std::vector<double> get_doubles(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  double get_double_or(const std::string& key, double fallback) const;
  std::vector<double> get_doubles_or(const std::string& key, std::vector<double> fallback) const;
  std::string get_string_or(const std::string& key, std::string fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  /// Throws ConfigError naming the first key not matched by any allowed key or
  /// allowed prefix (a prefix ends with '.').
  void reject_unknown(const std::set<std::string>& allowed) const;

  /// ConfigError pointing at the line that defined `key`.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const Entry& require(const std::string& key) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace nuexo
