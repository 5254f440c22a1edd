// Copyright 2026 The QACE Authors
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

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"
#include "qace/error.hpp"

namespace qace {

// Flat key/value run configuration. Files use one `key = value` per line
// with '#' comments; command-line flags override file values.
class RunConfig {
 public:
  static const std::set<std::string>& KnownKeys() {
    static const std::set<std::string> keys = {
        "mode",          "backend",          "backend_id",
        "cache_dir",     "seed",             "max_in_flight",
        "workers",       "lexicon",          "similarity.components",
        "similarity.clamp", "answerability.side", "candidate_answer",
        "answer_form",   "spans.source",     "refs_per_instance",
        "input",         "input_schema",     "output",
        "ratio",         "ratio_base",       "match",
        "split",         "train_output",     "validation_output",
        "report_output", "schema",           "benchmark",
        "scores",        "human_range",      "ties",
        "pearson",       "instances",
    };
    return keys;
  }

  static RunConfig ParseText(std::string_view text, std::string_view origin) {
    RunConfig config;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(pos, end - pos));
      pos = end + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::kConfigError, std::string(origin) + ":" +
                                                 std::to_string(line_no) +
                                                 ": expected key = value");
      }
      config.Set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
  }

  static RunConfig Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kConfigError, "cannot open config " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ParseText(text, path);
  }

  void Set(const std::string& key, std::string value) {
    if (!KnownKeys().count(key)) {
      throw Error(ErrorKind::kConfigError, "unknown config key '" + key + "'");
    }
    values_[key] = std::move(value);
  }

  bool Has(const std::string& key) const { return values_.count(key) > 0; }

  std::string Get(const std::string& key, std::string fallback = "") const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string Require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) {
      throw Error(ErrorKind::kConfigError, "missing required setting '" + key + "'");
    }
    return it->second;
  }

  std::uint64_t GetUnsigned(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorKind::kConfigError, key + " must be a non-negative integer");
    }
    return v;
  }

  double GetDouble(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfigError, key + " must be a number");
    }
  }

  bool GetBool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw Error(ErrorKind::kConfigError, key + " must be true or false");
  }

  nlohmann::json ToJson() const { return nlohmann::json(values_); }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace qace
