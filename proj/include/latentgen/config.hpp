// Copyright 2026 The latentgen Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Flat `key = value` configuration files. See docs/config.md for the grammar.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "latentgen/core.hpp"
#include "latentgen/csv.hpp"

namespace latentgen {

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in, const std::string& source = "<config>",
                      const std::filesystem::path& base_dir = {}) {
    Config c;
    c.source_ = source;
    c.base_dir_ = base_dir;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = csv::trim(line);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      const std::string at = source + ":" + std::to_string(line_no);
      if (eq == std::string_view::npos) throw ConfigError(at + ": expected 'key = value'");
      const std::string key(csv::trim(t.substr(0, eq)));
      const std::string value(csv::trim(t.substr(eq + 1)));
      if (!valid_key(key)) throw ConfigError(at + ": invalid key '" + key + "'");
      if (!c.values_.emplace(key, value).second) throw ConfigError(at + ": duplicate key '" + key + "'");
      c.lines_[key] = line_no;
    }
    return c;
  }

  static Config parse_string(const std::string& text, const std::string& source = "<config>") {
    std::istringstream in(text);
    return parse(in, source);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path, std::filesystem::path(path).parent_path());
  }

  static bool valid_key(std::string_view key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    return std::all_of(key.begin(), key.end(), [](char ch) {
      return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
    });
  }

  /// Overrides (or adds) a key, e.g. from the command line.
  void set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
    values_[key] = value;
  }

  /// Applies a `key=value` override string.
  void apply_override(std::string_view kv) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(kv) + "' is not key=value");
    set(std::string(csv::trim(kv.substr(0, eq))), std::string(csv::trim(kv.substr(eq + 1))));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback = "") const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) throw ConfigError(source_ + ": missing required key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_double(key, it->second);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_u64(key, it->second);
  }

  std::size_t get_size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(get_u64(key, fallback));
  }

  bool get_bool(const std::string& key, bool fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& v = it->second;
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError(where(key) + ": expected a boolean, got '" + v + "'");
  }

  std::vector<std::string> get_list(const std::string& key) const {
    used_.insert(key);
    std::vector<std::string> out;
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) return out;
    std::string_view rest = it->second;
    while (true) {
      const auto comma = rest.find(',');
      out.emplace_back(csv::trim(rest.substr(0, comma)));
      if (out.back().empty()) throw ConfigError(where(key) + ": empty list element");
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_list(key)) out.push_back(to_double(key, s));
    return out;
  }

  std::vector<std::size_t> get_size_list(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& s : get_list(key)) out.push_back(static_cast<std::size_t>(to_u64(key, s)));
    return out;
  }

  /// A path value resolved against the directory of the config file. Empty if unset.
  std::string get_path(const std::string& key) const {
    const auto v = get_string(key);
    if (v.empty()) return v;
    const std::filesystem::path p(v);
    if (p.is_absolute() || base_dir_.empty()) return p.lexically_normal().string();
    return (base_dir_ / p).lexically_normal().string();
  }

  /// Keys present in the file that no accessor has read.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  void reject_unused() const {
    const auto unused = unused_keys();
    if (unused.empty()) return;
    std::string msg = source_ + ": unknown key(s):";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string where(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? source_ + " (" + key + ")" : source_ + ":" + std::to_string(it->second) + " (" + key + ")";
  }

  double to_double(const std::string& key, const std::string& s) const {
    if (s == "inf" || s == "+inf" || s == "none") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || std::isnan(v))
      throw ConfigError(where(key) + ": expected a number, got '" + s + "'");
    return v;
  }

  std::uint64_t to_u64(const std::string& key, const std::string& s) const {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError(where(key) + ": expected a non-negative integer, got '" + s + "'");
    return v;
  }

  std::string source_ = "<config>";
  std::filesystem::path base_dir_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
  mutable std::set<std::string> used_;
};

}  // namespace latentgen
