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

#include "nuexo/common/config_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nuexo/common/errors.hpp"

namespace nuexo {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  // std::from_chars rejects a leading '+'.
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

ConfigFile ConfigFile::parse(std::string_view text, std::string source) {
  ConfigFile cfg;
  cfg.source_ = std::move(source);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(cfg.source_, line_no, "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(cfg.source_, line_no, "empty key");
    if (value.empty()) throw ConfigError(cfg.source_, line_no, "empty value for '" + key + "'");
    if (cfg.entries_.count(key)) {
      throw ConfigError(cfg.source_, line_no, "duplicate key '" + key + "'");
    }
    cfg.entries_.emplace(key, Entry{value, line_no});
  }
  return cfg;
}

const ConfigFile::Entry& ConfigFile::require(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
  return it->second;
}

void ConfigFile::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_ + ": " + key + ": " + message);
  throw ConfigError(source_, it->second.line, key + ": " + message);
}

std::string ConfigFile::get_string(const std::string& key) const { return require(key).value; }

double ConfigFile::get_double(const std::string& key) const {
  const auto& e = require(key);
  const auto v = parse_number(e.value);
  if (!v) throw ConfigError(source_, e.line, "'" + key + "' is not a finite number: " + e.value);
  return *v;
}

std::vector<double> ConfigFile::get_doubles(const std::string& key) const {
  const auto& e = require(key);
  std::vector<double> out;
  std::string_view rest = e.value;
  while (true) {
    const auto comma = rest.find(',');
    const auto v = parse_number(rest.substr(0, comma));
    if (!v) throw ConfigError(source_, e.line, "'" + key + "' is not a number list: " + e.value);
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

bool ConfigFile::get_bool(const std::string& key) const {
  const auto& e = require(key);
  if (e.value == "true" || e.value == "on" || e.value == "1") return true;
  if (e.value == "false" || e.value == "off" || e.value == "0") return false;
  throw ConfigError(source_, e.line, "'" + key + "' is not a boolean: " + e.value);
}

double ConfigFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::vector<double> ConfigFile::get_doubles_or(const std::string& key,
                                               std::vector<double> fallback) const {
  return has(key) ? get_doubles(key) : fallback;
}

std::string ConfigFile::get_string_or(const std::string& key, std::string fallback) const {
  return has(key) ? get_string(key) : fallback;
}

bool ConfigFile::get_bool_or(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

void ConfigFile::reject_unknown(const std::set<std::string>& allowed) const {
  for (const auto& [key, entry] : entries_) {
    bool ok = allowed.count(key) != 0;
    for (const auto& a : allowed) {
      if (!ok && !a.empty() && a.back() == '.' && key.rfind(a, 0) == 0) ok = true;
    }
    if (!ok) throw ConfigError(source_, entry.line, "unknown key '" + key + "'");
  }
}

}  // namespace nuexo
