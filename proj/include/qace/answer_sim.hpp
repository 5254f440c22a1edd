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

// Answer comparison functions: SQuAD-style token F1, backend embedding
// similarity and answerability (1 - P(unanswerable)), plus their mean.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qace/error.hpp"
#include "qace/gateway.hpp"
#include "qace/utf8.hpp"

namespace qace {

struct NormalizedAnswer {
  std::vector<std::string> tokens;
};

// lower -> drop ASCII punctuation -> drop articles -> split on whitespace.
inline NormalizedAnswer NormalizeAnswer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : utf8::AsciiLower(text)) {
    if (!utf8::IsAsciiPunct(static_cast<unsigned char>(c))) cleaned.push_back(c);
  }
  NormalizedAnswer out;
  std::istringstream words(cleaned);
  std::string word;
  while (words >> word) {
    if (word == "a" || word == "an" || word == "the") continue;
    out.tokens.push_back(std::move(word));
  }
  return out;
}

inline double TokenF1(std::string_view a, std::string_view b) {
  const auto ta = NormalizeAnswer(a).tokens;
  const auto tb = NormalizeAnswer(b).tokens;
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;

  std::map<std::string_view, int> counts;
  for (const auto& t : ta) ++counts[t];
  int overlap = 0;
  for (const auto& t : tb) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / ta.size();
  const double recall = static_cast<double>(overlap) / tb.size();
  return 2.0 * precision * recall / (precision + recall);
}

inline double Answerability(const AnswerRecord& record) {
  return 1.0 - record.p_unanswerable;
}

enum class AnswerabilitySide { kContext, kCandidate, kMin, kMean };

inline AnswerabilitySide ParseAnswerabilitySide(std::string_view name) {
  if (name == "context") return AnswerabilitySide::kContext;
  if (name == "candidate") return AnswerabilitySide::kCandidate;
  if (name == "min") return AnswerabilitySide::kMin;
  if (name == "mean") return AnswerabilitySide::kMean;
  throw Error(ErrorKind::kConfigError,
              "answerability.side must be context|candidate|min|mean");
}

struct SimilarityConfig {
  bool f1 = true;
  bool embedding = true;
  bool answerability = true;
  AnswerabilitySide answerability_side = AnswerabilitySide::kContext;

  bool any() const { return f1 || embedding || answerability; }

  // Accepts "f1,embedding,answerability" (any non-empty subset, any order).
  static SimilarityConfig WithComponents(std::string_view list) {
    SimilarityConfig config;
    config.f1 = config.embedding = config.answerability = false;
    std::string item;
    std::istringstream in{std::string(list)};
    while (std::getline(in, item, ',')) {
      item.erase(std::remove_if(item.begin(), item.end(),
                                [](char c) { return c == ' ' || c == '[' || c == ']'; }),
                 item.end());
      if (item == "f1") {
        config.f1 = true;
      } else if (item == "embedding") {
        config.embedding = true;
      } else if (item == "answerability") {
        config.answerability = true;
      } else if (!item.empty()) {
        throw Error(ErrorKind::kConfigError,
                    "unknown similarity component '" + item + "'");
      }
    }
    if (!config.any()) {
      throw Error(ErrorKind::kConfigError, "no similarity component enabled");
    }
    return config;
  }
};

struct SimilarityBreakdown {
  std::optional<double> f1;
  std::optional<double> embedding;
  std::optional<double> answerability;
  double mean = 0.0;

  bool operator==(const SimilarityBreakdown&) const = default;
};

inline double MeanOfPresent(const SimilarityBreakdown& b) {
  double sum = 0.0;
  int n = 0;
  for (const auto& c : {b.f1, b.embedding, b.answerability}) {
    if (c) {
      sum += *c;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / n;
}

// `gateway` may be null when the embedding component is disabled.
inline SimilarityBreakdown Compose(const AnswerRecord& candidate,
                                   const AnswerRecord& context,
                                   const SimilarityConfig& config,
                                   Gateway* gateway) {
  if (!config.any()) {
    throw Error(ErrorKind::kConfigError, "no similarity component enabled");
  }
  SimilarityBreakdown b;
  if (config.f1) b.f1 = TokenF1(candidate.answer_text, context.answer_text);
  if (config.embedding) {
    if (gateway == nullptr) {
      throw Error(ErrorKind::kComponentUnavailable,
                  "embedding similarity needs a backend");
    }
    if (candidate.answer_text.empty() || context.answer_text.empty()) {
      b.embedding = candidate.answer_text.empty() && context.answer_text.empty()
                        ? 1.0 : 0.0;
    } else {
      b.embedding = gateway->Similarity(candidate.answer_text, context.answer_text);
    }
  }
  if (config.answerability) {
    const double ctx = Answerability(context);
    const double cand = Answerability(candidate);
    switch (config.answerability_side) {
      case AnswerabilitySide::kContext: b.answerability = ctx; break;
      case AnswerabilitySide::kCandidate: b.answerability = cand; break;
      case AnswerabilitySide::kMin: b.answerability = std::min(ctx, cand); break;
      case AnswerabilitySide::kMean: b.answerability = 0.5 * (ctx + cand); break;
    }
  }
  b.mean = MeanOfPresent(b);
  return b;
}

inline void to_json(nlohmann::json& j, const SimilarityBreakdown& b) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j = nlohmann::json{{"f1", opt(b.f1)},
                     {"embedding", opt(b.embedding)},
                     {"answerability", opt(b.answerability)},
                     {"mean", b.mean}};
}

inline void from_json(const nlohmann::json& j, SimilarityBreakdown& b) {
  const auto opt = [&](const char* k) -> std::optional<double> {
    if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
    return j.at(k).get<double>();
  };
  b.f1 = opt("f1");
  b.embedding = opt("embedding");
  b.answerability = opt("answerability");
  b.mean = j.at("mean").get<double>();
}

}  // namespace qace
