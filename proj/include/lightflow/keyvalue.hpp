// Copyright 2026 The lightflow Authors.
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

// Line-oriented `key = value` text files, used for rigs, scenes, run
// configurations and metrics. `#` starts a comment; blank lines are ignored;
// list values are whitespace separated.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "lightflow/error.hpp"

namespace lightflow {

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

inline std::string format_numbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_number(values[i]);
  }
  return out;
}

class KeyValueFile {
 public:
  KeyValueFile() = default;
  explicit KeyValueFile(std::string source) : source_(std::move(source)) {}

  static KeyValueFile parse(std::istream& in, std::string source = "<input>") {
    KeyValueFile file(std::move(source));
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string_view text = trim(line);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(file.where(line_number) + ": expected `key = value`");
      }
      const std::string key(trim(text.substr(0, eq)));
      const std::string value(trim(text.substr(eq + 1)));
      if (key.empty()) throw ConfigError(file.where(line_number) + ": empty key");
      if (file.values_.count(key)) {
        throw ConfigError(file.where(line_number) + ": duplicate key `" + key + "`");
      }
      file.set(key, value);
    }
    return file;
  }

  static KeyValueFile parse_string(const std::string& text, std::string source = "<string>") {
    std::istringstream in(text);
    return parse(in, std::move(source));
  }

  static KeyValueFile load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse(in, path.string());
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << serialize();
    if (!out) throw IoError("failed writing " + path.string());
  }

  const std::string& source() const { return source_; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, std::string value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = std::move(value);
  }
  void set(const std::string& key, double value) { set(key, format_number(value)); }
  void set(const std::string& key, const std::vector<double>& values) {
    set(key, format_numbers(values));
  }
  void set(const std::string& key, std::initializer_list<double> values) {
    set(key, std::vector<double>(values));
  }

  std::string get_string(const std::string& key) const { return raw(key); }

  std::optional<std::string> find_string(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return raw(key);
  }

  double get_double(const std::string& key) const {
    const auto values = get_doubles(key, 1);
    return values[0];
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::int64_t get_int(const std::string& key) const {
    const std::string text = raw(key);
    std::int64_t value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
      throw ConfigError(source_ + ": `" + key + "` expects an integer, got `" + text + "`");
    }
    return value;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  /// Reads a list of numbers; `count` of 0 accepts any non-empty length.
  std::vector<double> get_doubles(const std::string& key, std::size_t count = 0) const {
    const std::string text = raw(key);
    std::vector<double> values;
    std::istringstream tokens(text);
    std::string token;
    while (tokens >> token) {
      double value = 0.0;
      const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
      if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
        throw ConfigError(source_ + ": `" + key + "` expects numbers, got `" + token + "`");
      }
      values.push_back(value);
    }
    if (values.empty() || (count != 0 && values.size() != count)) {
      throw ConfigError(source_ + ": `" + key + "` expects " +
                        (count ? std::to_string(count) : std::string("at least one")) +
                        " number(s)");
    }
    return values;
  }

  /// Throws ConfigError naming every key that was never read.
  void reject_unread_keys() const {
    std::string unknown;
    for (const auto& key : order_) {
      if (!read_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    }
    if (!unknown.empty()) throw ConfigError(source_ + ": unknown key(s): " + unknown);
  }

  std::string serialize() const {
    std::string out;
    for (const auto& key : order_) out += key + " = " + values_.at(key) + "\n";
    return out;
  }

  const std::vector<std::string>& keys() const { return order_; }

 private:
  static std::string_view trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
  }

  std::string where(int line) const { return source_ + ":" + std::to_string(line); }

  const std::string& raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(source_ + ": missing key `" + key + "`");
    read_.insert(key);
    return it->second;
  }

  std::string source_ = "<memory>";
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  mutable std::set<std::string> read_;
};

}  // namespace lightflow
