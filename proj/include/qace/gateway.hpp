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

#include <algorithm>
#include <cmath>
#include <atomic>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "qace/backend.hpp"
#include "qace/cache.hpp"
#include "qace/error.hpp"
#include "qace/span_extract.hpp"

namespace qace {

// Literal answer a QA model gives when it judges a question unanswerable.
inline constexpr std::string_view kUnanswerable = "unanswerable";

enum class ContextKind { kCandidate, kReference, kImage };

inline std::string_view ContextKindName(ContextKind kind) {
  switch (kind) {
    case ContextKind::kCandidate: return "candidate";
    case ContextKind::kReference: return "reference";
    case ContextKind::kImage: return "image";
  }
  return "unknown";
}

inline ContextKind ParseContextKind(std::string_view name) {
  if (name == "candidate") return ContextKind::kCandidate;
  if (name == "reference") return ContextKind::kReference;
  if (name == "image") return ContextKind::kImage;
  throw Error(ErrorKind::kSchemaViolation,
              "unknown context kind '" + std::string(name) + "'");
}

struct AnswerRecord {
  std::string answer_text;
  double p_unanswerable = 0.0;
  ContextKind context_kind = ContextKind::kCandidate;
  std::string backend_id;

  bool operator==(const AnswerRecord&) const = default;
};

struct GeneratedQuestion {
  std::string question;
  AnswerSpan source_span;

  bool operator==(const GeneratedQuestion&) const = default;
};

struct QuestionSet {
  std::string caption_id;
  std::vector<GeneratedQuestion> questions;

  std::size_t M() const { return questions.size(); }
};

inline void to_json(nlohmann::json& j, const AnswerRecord& r) {
  j = nlohmann::json{{"answer", r.answer_text},
                     {"p_unanswerable", r.p_unanswerable},
                     {"context_kind", ContextKindName(r.context_kind)},
                     {"backend_id", r.backend_id}};
}

inline void from_json(const nlohmann::json& j, AnswerRecord& r) {
  r.answer_text = j.at("answer").get<std::string>();
  r.p_unanswerable = j.at("p_unanswerable").get<double>();
  r.context_kind = ParseContextKind(j.at("context_kind").get<std::string>());
  r.backend_id = j.value("backend_id", std::string());
}

struct GatewayOptions {
  std::size_t max_in_flight = 8;
  bool clamp_similarity = true;
};

// Typed, validated and cached access to a Backend. Thread-safe; at most
// `max_in_flight` backend requests are outstanding at any time.
class Gateway {
 public:
  Gateway(Backend& backend, ResponseCache* cache = nullptr,
          GatewayOptions options = {})
      : backend_(backend),
        cache_(cache),
        options_(options),
        in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options.max_in_flight))) {}

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  const std::string backend_id() const { return backend_.id(); }
  const GatewayOptions& options() const { return options_; }
  ResponseCache* cache() const { return cache_; }

  // Requests that actually reached the backend (cache misses).
  std::size_t backend_calls() const { return backend_calls_.load(); }

  // Forwards on a cache miss and stores the reply; otherwise replays it.
  nlohmann::json CachedCall(Capability capability,
                            const nlohmann::json& request) {
    if (cache_ == nullptr) return Forward(capability, request);
    const auto key =
        CacheKey::Of(backend_.id(), CapabilityName(capability), request);
    if (auto hit = cache_->Get(key)) return *std::move(hit);
    nlohmann::json response = Forward(capability, request);
    cache_->Put(key, backend_.id(), response);
    return response;
  }

  QuestionSet GenerateQuestions(const std::string& caption_id,
                                const std::string& caption,
                                const std::vector<AnswerSpan>& spans) {
    if (spans.empty()) {
      throw Error(ErrorKind::kNoAnswerCandidates, "caption '" + caption + "'");
    }
    nlohmann::json request = {{"caption", caption},
                              {"spans", nlohmann::json::array()}};
    for (const auto& span : spans) request["spans"].push_back(span);
    const auto response = CachedCall(Capability::kGenerateQuestions, request);

    const auto& questions = Field(response, "questions", "generate_questions");
    if (!questions.is_array() || questions.size() != spans.size()) {
      throw Violation("generate_questions: expected " +
                          std::to_string(spans.size()) + " questions",
                      response);
    }
    QuestionSet set;
    set.caption_id = caption_id;
    set.questions.resize(spans.size());
    std::vector<bool> seen(spans.size(), false);
    for (const auto& q : questions) {
      const auto& text = Field(q, "question", "generate_questions");
      const auto& index = Field(q, "span_index", "generate_questions");
      if (!text.is_string() || text.get<std::string>().empty() ||
          !index.is_number_integer() || index.get<std::int64_t>() < 0 ||
          index.get<std::size_t>() >= spans.size() ||
          seen[index.get<std::size_t>()]) {
        throw Violation("generate_questions: bad question entry", q);
      }
      const auto i = index.get<std::size_t>();
      seen[i] = true;
      set.questions[i] = {text.get<std::string>(), spans[i]};
    }
    return set;
  }

  AnswerRecord AnswerText(const std::string& question,
                          const std::string& context,
                          ContextKind kind = ContextKind::kReference) {
    RequireText(question, "answer_text question");
    RequireText(context, "answer_text context");
    const auto response = CachedCall(
        Capability::kAnswerText, {{"question", question}, {"context", context}});
    return ParseAnswer(response, kind, "answer_text");
  }

  AnswerRecord AnswerVisual(const std::string& question,
                            const std::string& image_id) {
    RequireText(question, "answer_visual question");
    if (image_id.empty()) {
      throw Error(ErrorKind::kUnknownImage, "empty image id");
    }
    const auto response = CachedCall(
        Capability::kAnswerVisual, {{"question", question}, {"image_id", image_id}});
    return ParseAnswer(response, ContextKind::kImage, "answer_visual");
  }

  double Similarity(const std::string& a, const std::string& b) {
    RequireText(a, "similarity a");
    RequireText(b, "similarity b");
    const auto response =
        CachedCall(Capability::kSimilarity, {{"a", a}, {"b", b}});
    const auto& score = Field(response, "score", "similarity");
    if (!score.is_number()) throw Violation("similarity: score not a number", response);
    const double value = score.get<double>();
    if (!std::isfinite(value)) throw Violation("similarity: non-finite score", response);
    if (options_.clamp_similarity && (value < 0.0 || value > 1.0)) {
      spdlog::warn("similarity('{}', '{}') = {} clamped to [0,1]", a, b, value);
      return std::clamp(value, 0.0, 1.0);
    }
    return value;
  }

  // Backend-side chunker; spans come back in caption order and are renumbered.
  std::vector<AnswerSpan> ExtractSpans(const std::string& caption) {
    const auto response =
        CachedCall(Capability::kExtractSpans, {{"caption", caption}});
    const auto& spans = Field(response, "spans", "extract_spans");
    if (!spans.is_array()) throw Violation("extract_spans: spans not an array", response);
    std::vector<AnswerSpan> out;
    try {
      for (const auto& s : spans) {
        AnswerSpan span = s.get<AnswerSpan>();
        span.index = out.size();
        out.push_back(std::move(span));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Violation(std::string("extract_spans: ") + e.what(), response);
    }
    return out;
  }

 private:
  nlohmann::json Forward(Capability capability, const nlohmann::json& request) {
    struct Slot {
      std::counting_semaphore<>& s;
      explicit Slot(std::counting_semaphore<>& sem) : s(sem) { s.acquire(); }
      ~Slot() { s.release(); }
    } slot(in_flight_);
    backend_calls_.fetch_add(1);
    return backend_.Call(capability, request);
  }

  AnswerRecord ParseAnswer(const nlohmann::json& response, ContextKind kind,
                           std::string_view capability) {
    const auto& answer = Field(response, "answer", capability);
    const auto& p = Field(response, "p_unanswerable", capability);
    if (!answer.is_string() || !p.is_number()) {
      throw Violation(std::string(capability) + ": wrong field types", response);
    }
    const double value = p.get<double>();
    if (!(value >= 0.0 && value <= 1.0)) {
      throw Violation(std::string(capability) + ": p_unanswerable outside [0,1]",
                      response);
    }
    AnswerRecord record{answer.get<std::string>(), value, kind, backend_.id()};
    if (record.answer_text == kUnanswerable && value < 0.5) {
      spdlog::warn("{} answered '{}' with p_unanswerable {}", capability,
                   kUnanswerable, value);
    }
    return record;
  }

  static const nlohmann::json& Field(const nlohmann::json& object,
                                     const char* name,
                                     std::string_view capability) {
    if (!object.is_object() || !object.contains(name)) {
      throw Violation(std::string(capability) + ": missing field '" + name + "'",
                      object);
    }
    return object.at(name);
  }

  static Error Violation(const std::string& what, const nlohmann::json& body) {
    return Error(ErrorKind::kProtocolViolation, what + " in " + body.dump());
  }

  static void RequireText(const std::string& text, const char* what) {
    if (text.empty()) {
      throw Error(ErrorKind::kProtocolViolation, std::string(what) + " is empty");
    }
  }

  Backend& backend_;
  ResponseCache* cache_;
  GatewayOptions options_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> backend_calls_{0};
};

}  // namespace qace
