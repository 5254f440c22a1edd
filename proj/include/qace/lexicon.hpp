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

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "qace/error.hpp"
#include "qace/utf8.hpp"

namespace qace {

enum class PosTag : std::uint8_t {
  kDet,
  kAdj,
  kNoun,
  kVerb,
  kAdp,
  kPron,
  kAdv,
  kNum,
  kOther,
};

inline std::string_view PosTagName(PosTag tag) {
  static constexpr std::array<std::string_view, 9> kNames = {
      "DET", "ADJ", "NOUN", "VERB", "ADP", "PRON", "ADV", "NUM", "OTHER"};
  return kNames[static_cast<std::size_t>(tag)];
}

inline std::optional<PosTag> ParsePosTag(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(PosTag::kOther); ++i) {
    const auto tag = static_cast<PosTag>(i);
    if (PosTagName(tag) == name) return tag;
  }
  return std::nullopt;
}

// Closed-class word list. A word may carry several tags ("park" is both a
// NOUN and a VERB); direct lookups resolve them by a fixed priority while the
// inflection rules of the tagger ask for specific readings.
class Lexicon {
 public:
  // Parses `word<TAB>TAG` lines. Blank lines and lines starting with '#' are
  // skipped. Words are matched case-insensitively (ASCII folding).
  static Lexicon Parse(std::string_view text, std::string_view origin = "") {
    Lexicon lexicon;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      const std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos || tab == 0) {
        throw SchemaViolation(line_no, "lexicon entry without <TAB> in " +
                                           std::string(origin));
      }
      const auto tag = ParsePosTag(line.substr(tab + 1));
      if (!tag) {
        throw SchemaViolation(line_no, "unknown tag '" +
                                           std::string(line.substr(tab + 1)) +
                                           "' in " + std::string(origin));
      }
      lexicon.Add(line.substr(0, tab), *tag);
    }
    return lexicon;
  }

  static Lexicon Load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(ErrorKind::kConfigError, "cannot open lexicon " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return Parse(buffer.str(), path);
  }

  // The lexicon compiled from data/lexicon.tsv.
  static const Lexicon& Default();

  void Add(std::string_view word, PosTag tag) {
    entries_[utf8::AsciiLower(word)] |= Bit(tag);
  }

  // Highest-priority tag for `word`, if listed.
  std::optional<PosTag> Lookup(std::string_view word) const {
    const auto it = entries_.find(utf8::AsciiLower(word));
    if (it == entries_.end()) return std::nullopt;
    for (PosTag tag : kPriority) {
      if (it->second & Bit(tag)) return tag;
    }
    return std::nullopt;
  }

  bool Has(std::string_view word, PosTag tag) const {
    const auto it = entries_.find(utf8::AsciiLower(word));
    return it != entries_.end() && (it->second & Bit(tag)) != 0;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  static constexpr std::array<PosTag, 9> kPriority = {
      PosTag::kDet,  PosTag::kPron, PosTag::kAdp, PosTag::kNum,  PosTag::kOther,
      PosTag::kNoun, PosTag::kAdj,  PosTag::kAdv, PosTag::kVerb};

  static constexpr std::uint16_t Bit(PosTag tag) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(tag));
  }

  std::map<std::string, std::uint16_t, std::less<>> entries_;
};

}  // namespace qace

#include "qace/default_lexicon.inc"

namespace qace {

inline const Lexicon& Lexicon::Default() {
  static const Lexicon lexicon = Parse(kDefaultLexiconText, "<builtin>");
  return lexicon;
}

}  // namespace qace
