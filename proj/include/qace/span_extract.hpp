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

// Noun-phrase answer candidates.
//
// A caption is split into tokens (whitespace-delimited words, with leading
// and trailing ASCII punctuation peeled off as separate tokens), each token is
// tagged from the closed-class lexicon plus a handful of suffix rules, and
// flat chunks matching DET? (ADJ|NOUN)* NOUN are collected left to right.
// Offsets are code-point offsets into the caption.

#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qace/error.hpp"
#include "qace/lexicon.hpp"
#include "qace/utf8.hpp"

namespace qace {

struct PosToken {
  std::string surface;
  PosTag tag = PosTag::kOther;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const PosToken&) const = default;
};

struct AnswerSpan {
  std::string text;
  std::string head_noun;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::size_t index = 0;

  bool operator==(const AnswerSpan&) const = default;
};

// Which surface of a span is handed to question generation.
enum class AnswerForm { kSpan, kHead };

namespace internal {

inline bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

inline bool IsNumeric(std::string_view word) {
  bool digit = false;
  for (char c : word) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != ',' && c != '.') {
      return false;
    }
  }
  return digit;
}

// Stems of an inflected form that may be a lexicon verb.
inline std::vector<std::string> VerbStems(const std::string& w) {
  std::vector<std::string> stems;
  const auto n = w.size();
  const auto doubled = [&](std::size_t cut) {
    return n > cut + 1 && w[n - cut - 1] == w[n - cut - 2];
  };
  if (EndsWith(w, "ing") && n > 4) {
    stems.push_back(w.substr(0, n - 3));
    stems.push_back(w.substr(0, n - 3) + "e");
    if (doubled(3)) stems.push_back(w.substr(0, n - 4));
    if (EndsWith(w, "ying")) stems.push_back(w.substr(0, n - 4) + "ie");
  } else if (EndsWith(w, "ed") && n > 3) {
    stems.push_back(w.substr(0, n - 2));
    stems.push_back(w.substr(0, n - 1));
    if (doubled(2)) stems.push_back(w.substr(0, n - 3));
    if (EndsWith(w, "ied")) stems.push_back(w.substr(0, n - 3) + "y");
  }
  return stems;
}

inline std::vector<std::string> PluralStems(const std::string& w) {
  std::vector<std::string> stems;
  const auto n = w.size();
  if (n < 3 || !EndsWith(w, "s") || EndsWith(w, "ss")) return stems;
  stems.push_back(w.substr(0, n - 1));
  if (EndsWith(w, "es")) stems.push_back(w.substr(0, n - 2));
  if (EndsWith(w, "ies")) stems.push_back(w.substr(0, n - 3) + "y");
  return stems;
}

inline PosTag TagWord(const std::string& surface, const Lexicon& lexicon,
                      const PosToken* previous) {
  const std::string w = utf8::AsciiLower(surface);
  // "children play": a noun/verb word right after a noun or pronoun is the
  // predicate.
  if (previous != nullptr &&
      (previous->tag == PosTag::kNoun || previous->tag == PosTag::kPron) &&
      lexicon.Has(w, PosTag::kNoun) && lexicon.Has(w, PosTag::kVerb)) {
    return PosTag::kVerb;
  }
  if (const auto tag = lexicon.Lookup(w)) return *tag;
  if (IsNumeric(w)) return PosTag::kNum;

  // Third-person verb forms. When the stem is also a noun the previous tag
  // decides: inside a noun phrase the plural noun reading wins.
  for (const auto& stem : PluralStems(w)) {
    if (!lexicon.Has(stem, PosTag::kVerb)) continue;
    if (lexicon.Has(stem, PosTag::kNoun) && previous != nullptr &&
        (previous->tag == PosTag::kDet || previous->tag == PosTag::kAdj ||
         previous->tag == PosTag::kNum)) {
      return PosTag::kNoun;
    }
    return PosTag::kVerb;
  }
  for (const auto& stem : VerbStems(w)) {
    if (lexicon.Has(stem, PosTag::kVerb)) return PosTag::kVerb;
  }
  if (w.size() > 4 && EndsWith(w, "ly")) return PosTag::kAdv;
  if (w.size() >= 6) {
    for (std::string_view suffix : {"ous", "ful", "less", "ive", "ish"}) {
      if (EndsWith(w, suffix)) return PosTag::kAdj;
    }
  }
  return PosTag::kNoun;
}

}  // namespace internal

// Splits and tags a caption. Every non-whitespace code point belongs to
// exactly one token.
inline std::vector<PosToken> TagTokens(std::string_view caption,
                                       const Lexicon& lexicon = Lexicon::Default()) {
  const std::u32string text = utf8::Decode(caption);
  std::vector<PosToken> tokens;

  const auto emit = [&](std::size_t begin, std::size_t end, bool punct) {
    PosToken token;
    token.surface = utf8::Encode(std::u32string_view(text).substr(begin, end - begin));
    token.char_start = begin;
    token.char_end = end;
    token.tag = punct ? PosTag::kOther
                      : internal::TagWord(token.surface, lexicon,
                                          tokens.empty() ? nullptr : &tokens.back());
    tokens.push_back(std::move(token));
  };

  std::size_t i = 0;
  while (i < text.size()) {
    if (utf8::IsSpace(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && !utf8::IsSpace(text[end])) ++end;

    std::size_t core_begin = i;
    std::size_t core_end = end;
    while (core_begin < core_end && utf8::IsAsciiPunct(text[core_begin])) {
      ++core_begin;
    }
    while (core_end > core_begin && utf8::IsAsciiPunct(text[core_end - 1])) {
      --core_end;
    }
    for (std::size_t p = i; p < core_begin; ++p) emit(p, p + 1, true);
    if (core_begin < core_end) emit(core_begin, core_end, false);
    for (std::size_t p = core_end; p < end; ++p) emit(p, p + 1, true);
    i = end;
  }

  if (tokens.empty()) {
    throw Error(ErrorKind::kEmptyCaption, "caption has no tokens");
  }
  return tokens;
}

// Leftmost-longest matches of DET? (ADJ|NOUN)* NOUN over `tokens`, which
// must come from TagTokens(caption).
inline std::vector<AnswerSpan> ExtractNounPhrases(std::string_view caption,
                                                  std::span<const PosToken> tokens) {
  const std::u32string text = utf8::Decode(caption);
  std::vector<AnswerSpan> spans;
  const auto is_body = [](PosTag t) {
    return t == PosTag::kAdj || t == PosTag::kNoun;
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t j = i;
    if (tokens[j].tag == PosTag::kDet) ++j;
    std::size_t last_noun = tokens.size();
    while (j < tokens.size() && is_body(tokens[j].tag)) {
      if (tokens[j].tag == PosTag::kNoun) last_noun = j;
      ++j;
    }
    if (last_noun == tokens.size()) {
      ++i;
      continue;
    }
    AnswerSpan span;
    span.char_start = tokens[i].char_start;
    span.char_end = tokens[last_noun].char_end;
    span.text = utf8::Encode(std::u32string_view(text).substr(
        span.char_start, span.char_end - span.char_start));
    span.head_noun = tokens[last_noun].surface;
    span.index = spans.size();
    spans.push_back(std::move(span));
    i = last_noun + 1;
  }
  return spans;
}

// Drops spans whose case-folded text repeats an earlier one and renumbers.
inline std::vector<AnswerSpan> DedupeSpans(std::vector<AnswerSpan> spans) {
  std::set<std::string> seen;
  std::vector<AnswerSpan> out;
  for (auto& span : spans) {
    if (!seen.insert(utf8::AsciiLower(span.text)).second) continue;
    span.index = out.size();
    out.push_back(std::move(span));
  }
  return out;
}

inline std::vector<AnswerSpan> ExtractAnswerSpans(
    std::string_view caption, const Lexicon& lexicon = Lexicon::Default()) {
  const auto tokens = TagTokens(caption, lexicon);
  return DedupeSpans(ExtractNounPhrases(caption, tokens));
}

// Narrows a span to its head noun, which always ends the span.
inline AnswerSpan AsHeadSpan(const AnswerSpan& span) {
  AnswerSpan head = span;
  head.text = span.head_noun;
  head.char_start =
      span.char_end - utf8::Decode(span.head_noun).size();
  return head;
}

inline void to_json(nlohmann::json& j, const AnswerSpan& span) {
  j = nlohmann::json{{"text", span.text},
                     {"head_noun", span.head_noun},
                     {"char_start", span.char_start},
                     {"char_end", span.char_end}};
}

inline void from_json(const nlohmann::json& j, AnswerSpan& span) {
  span.text = j.at("text").get<std::string>();
  span.head_noun = j.value("head_noun", span.text);
  span.char_start = j.at("char_start").get<std::size_t>();
  span.char_end = j.at("char_end").get<std::size_t>();
  span.index = j.value("index", std::size_t{0});
}

}  // namespace qace
