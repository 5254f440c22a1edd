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

// QACE scoring.
//
// For a candidate caption x the scorer extracts noun-phrase answers, asks the
// backend for one question q_i per answer and then answers every question
// twice: on x itself and on a context (a reference caption, or the image).
// With f an answer-similarity function and M questions,
//
//   QACE_f = (1/M) * sum_i f(QA(q_i, x), QA(q_i, ctx))
//
// and the reported QACE is the mean of QACE_f over the enabled functions
// (token F1, embedding similarity, answerability by default).

#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "qace/answer_sim.hpp"
#include "qace/error.hpp"
#include "qace/gateway.hpp"
#include "qace/span_extract.hpp"

namespace qace {

enum class ScoreMode { kRef, kImg };

inline std::string_view ScoreModeName(ScoreMode mode) {
  return mode == ScoreMode::kRef ? "ref" : "img";
}

inline ScoreMode ParseScoreMode(std::string_view name) {
  if (name == "ref") return ScoreMode::kRef;
  if (name == "img") return ScoreMode::kImg;
  throw Error(ErrorKind::kConfigError, "mode must be ref or img");
}

// Where QA(q_i, x) comes from: a textual-QA call on the candidate, or the
// answer span the question was generated for.
enum class CandidateAnswer { kQa, kSpan };
enum class SpanSource { kBuiltin, kBackend };

struct ScorerConfig {
  SimilarityConfig similarity;
  CandidateAnswer candidate_answer = CandidateAnswer::kQa;
  AnswerForm answer_form = AnswerForm::kSpan;
  SpanSource span_source = SpanSource::kBuiltin;
  const Lexicon* lexicon = nullptr;  // null: built-in lexicon
  std::size_t workers = 4;
  std::size_t refs_per_instance = 0;  // 0: use every reference
};

struct EvaluationInstance {
  std::string instance_id;
  std::string candidate;
  std::vector<std::string> references;
  std::optional<std::string> image_id;
  std::optional<double> human_score;
};

struct QuestionResult {
  std::string question;
  AnswerSpan source_span;
  AnswerRecord answer_on_candidate;
  AnswerRecord answer_on_context;
  SimilarityBreakdown breakdown;
};

struct QaceScore {
  std::vector<QuestionResult> per_question;
  std::size_t M = 0;
  std::optional<double> qace_f1;
  std::optional<double> qace_embedding;
  std::optional<double> qace_answerability;
  double qace = 0.0;
  bool defined = false;
  // Filled by multi-reference scoring; each entry keeps its own questions.
  std::vector<QaceScore> per_reference;
};

// Mean of each similarity component over the questions, then over components.
inline QaceScore Aggregate(std::vector<QuestionResult> results,
                           const SimilarityConfig& config) {
  QaceScore score;
  score.M = results.size();
  score.defined = score.M > 0;
  if (score.defined) {
    double f1 = 0.0, emb = 0.0, ans = 0.0;
    for (const auto& r : results) {
      if (config.f1) f1 += r.breakdown.f1.value();
      if (config.embedding) emb += r.breakdown.embedding.value();
      if (config.answerability) ans += r.breakdown.answerability.value();
    }
    const double m = static_cast<double>(score.M);
    if (config.f1) score.qace_f1 = f1 / m;
    if (config.embedding) score.qace_embedding = emb / m;
    if (config.answerability) score.qace_answerability = ans / m;
    SimilarityBreakdown functions{score.qace_f1, score.qace_embedding,
                                  score.qace_answerability, 0.0};
    score.qace = MeanOfPresent(functions);
  }
  score.per_question = std::move(results);
  return score;
}

// Component-wise mean over the defined per-reference scores.
inline QaceScore AverageReferenceScores(std::vector<QaceScore> per_reference) {
  QaceScore out;
  std::size_t n = 0;
  double f1 = 0.0, emb = 0.0, ans = 0.0, qace = 0.0;
  bool has_f1 = false, has_emb = false, has_ans = false;
  for (const auto& s : per_reference) {
    if (!s.defined) continue;
    ++n;
    out.M = std::max(out.M, s.M);
    if (s.qace_f1) f1 += *s.qace_f1, has_f1 = true;
    if (s.qace_embedding) emb += *s.qace_embedding, has_emb = true;
    if (s.qace_answerability) ans += *s.qace_answerability, has_ans = true;
    qace += s.qace;
  }
  const std::size_t undefined = per_reference.size() - n;
  if (undefined > 0 && n > 0) {
    spdlog::warn("{} of {} references produced no questions; excluded from the mean",
                 undefined, per_reference.size());
  }
  out.defined = n > 0;
  if (out.defined) {
    const double d = static_cast<double>(n);
    if (has_f1) out.qace_f1 = f1 / d;
    if (has_emb) out.qace_embedding = emb / d;
    if (has_ans) out.qace_answerability = ans / d;
    out.qace = qace / d;
  }
  out.per_reference = std::move(per_reference);
  return out;
}

class Scorer {
 public:
  Scorer(Gateway& gateway, ScorerConfig config)
      : gateway_(gateway), config_(std::move(config)) {
    if (!config_.similarity.any()) {
      throw Error(ErrorKind::kConfigError, "no similarity component enabled");
    }
  }

  const ScorerConfig& config() const { return config_; }

  std::vector<AnswerSpan> Spans(const std::string& candidate) const {
    std::vector<AnswerSpan> spans;
    if (config_.span_source == SpanSource::kBackend) {
      spans = DedupeSpans(gateway_.ExtractSpans(candidate));
    } else {
      spans = ExtractAnswerSpans(
          candidate, config_.lexicon ? *config_.lexicon : Lexicon::Default());
    }
    if (config_.answer_form == AnswerForm::kHead) {
      for (auto& span : spans) span = AsHeadSpan(span);
      spans = DedupeSpans(std::move(spans));
    }
    return spans;
  }

  // Empty set when the candidate has no noun phrase.
  QuestionSet Questions(const std::string& caption_id,
                        const std::string& candidate) const {
    const auto spans = Spans(candidate);
    if (spans.empty()) {
      spdlog::warn("no answer candidates in '{}'; score undefined", candidate);
      return QuestionSet{caption_id, {}};
    }
    return gateway_.GenerateQuestions(caption_id, candidate, spans);
  }

  QaceScore ScoreAgainstReference(const std::string& candidate,
                                  const std::string& reference,
                                  const std::string& caption_id = "") const {
    RequireCandidate(candidate);
    if (reference.empty()) {
      throw Error(ErrorKind::kNoReferences, "empty reference caption");
    }
    return ScoreQuestions(Questions(caption_id, candidate), candidate,
                          [&](const std::string& q) {
                            return gateway_.AnswerText(q, reference,
                                                       ContextKind::kReference);
                          });
  }

  // Reference-less: nothing but the candidate and the image id reach here.
  QaceScore ScoreAgainstImage(const std::string& candidate,
                              const std::string& image_id,
                              const std::string& caption_id = "") const {
    RequireCandidate(candidate);
    return ScoreQuestions(Questions(caption_id, candidate), candidate,
                          [&](const std::string& q) {
                            return gateway_.AnswerVisual(q, image_id);
                          });
  }

  QaceScore ScoreMultiReference(const std::string& candidate,
                                const std::vector<std::string>& references,
                                const std::string& caption_id = "") const {
    RequireCandidate(candidate);
    if (references.empty()) {
      throw Error(ErrorKind::kNoReferences, "instance '" + caption_id + "'");
    }
    std::size_t used = references.size();
    if (config_.refs_per_instance > 0) {
      used = std::min(used, config_.refs_per_instance);
    }
    const QuestionSet questions = Questions(caption_id, candidate);
    std::vector<QaceScore> per_reference;
    per_reference.reserve(used);
    for (std::size_t r = 0; r < used; ++r) {
      const auto& reference = references[r];
      if (reference.empty()) {
        throw Error(ErrorKind::kNoReferences, "empty reference caption");
      }
      per_reference.push_back(ScoreQuestions(
          questions, candidate, [&](const std::string& q) {
            return gateway_.AnswerText(q, reference, ContextKind::kReference);
          }));
    }
    return AverageReferenceScores(std::move(per_reference));
  }

  QaceScore ScoreInstance(const EvaluationInstance& instance,
                          ScoreMode mode) const {
    if (mode == ScoreMode::kImg) {
      if (!instance.image_id || instance.image_id->empty()) {
        throw Error(ErrorKind::kUnknownImage,
                    "instance '" + instance.instance_id + "' has no image_id");
      }
      return ScoreAgainstImage(instance.candidate, *instance.image_id,
                               instance.instance_id);
    }
    return ScoreMultiReference(instance.candidate, instance.references,
                               instance.instance_id);
  }

  struct BatchResult {
    std::map<std::string, QaceScore> scores;
    std::map<std::string, std::string> failures;
  };

  // Instances run concurrently on `workers` threads; a failing instance is
  // recorded and the rest of the batch continues.
  BatchResult ScoreBatch(const std::vector<EvaluationInstance>& instances,
                         ScoreMode mode) const {
    BatchResult result;
    std::mutex mutex;
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
      for (std::size_t i = next.fetch_add(1); i < instances.size();
           i = next.fetch_add(1)) {
        const auto& instance = instances[i];
        try {
          QaceScore score = ScoreInstance(instance, mode);
          std::lock_guard lock(mutex);
          result.scores.emplace(instance.instance_id, std::move(score));
        } catch (const std::exception& e) {
          spdlog::error("instance {}: {}", instance.instance_id, e.what());
          std::lock_guard lock(mutex);
          result.failures.emplace(instance.instance_id, e.what());
        }
      }
    };
    const std::size_t threads =
        std::min(std::max<std::size_t>(1, config_.workers), instances.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    if (threads > 0) work();
    return result;
  }

 private:
  static void RequireCandidate(const std::string& candidate) {
    if (candidate.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw Error(ErrorKind::kEmptyCaption, "empty candidate caption");
    }
  }

  template <typename AnswerOnContext>
  QaceScore ScoreQuestions(const QuestionSet& questions,
                           const std::string& candidate,
                           AnswerOnContext&& answer_on_context) const {
    std::vector<QuestionResult> results;
    results.reserve(questions.M());
    for (const auto& q : questions.questions) {
      QuestionResult r;
      r.question = q.question;
      r.source_span = q.source_span;
      if (config_.candidate_answer == CandidateAnswer::kSpan) {
        r.answer_on_candidate = {q.source_span.text, 0.0,
                                 ContextKind::kCandidate, "span"};
      } else {
        r.answer_on_candidate =
            gateway_.AnswerText(q.question, candidate, ContextKind::kCandidate);
      }
      r.answer_on_context = answer_on_context(q.question);
      r.breakdown = Compose(r.answer_on_candidate, r.answer_on_context,
                            config_.similarity,
                            config_.similarity.embedding ? &gateway_ : nullptr);
      results.push_back(std::move(r));
    }
    return Aggregate(std::move(results), config_.similarity);
  }

  Gateway& gateway_;
  ScorerConfig config_;
};

// ---- JSON ---------------------------------------------------------------

inline nlohmann::json OptionalNumber(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> ReadOptionalNumber(const nlohmann::json& j,
                                                const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline void to_json(nlohmann::json& j, const QuestionResult& r) {
  j = nlohmann::json{{"question", r.question},
                     {"source_span", r.source_span},
                     {"answer_on_candidate", r.answer_on_candidate},
                     {"answer_on_context", r.answer_on_context},
                     {"breakdown", r.breakdown}};
}

inline void from_json(const nlohmann::json& j, QuestionResult& r) {
  r.question = j.at("question").get<std::string>();
  r.source_span = j.at("source_span").get<AnswerSpan>();
  r.answer_on_candidate = j.at("answer_on_candidate").get<AnswerRecord>();
  r.answer_on_context = j.at("answer_on_context").get<AnswerRecord>();
  r.breakdown = j.at("breakdown").get<SimilarityBreakdown>();
}

inline void to_json(nlohmann::json& j, const QaceScore& s) {
  j = nlohmann::json{{"defined", s.defined},
                     {"M", s.M},
                     {"qace", s.defined ? nlohmann::json(s.qace) : nlohmann::json(nullptr)},
                     {"qace_f1", OptionalNumber(s.qace_f1)},
                     {"qace_embedding", OptionalNumber(s.qace_embedding)},
                     {"qace_answerability", OptionalNumber(s.qace_answerability)},
                     {"per_question", s.per_question}};
  if (!s.per_reference.empty()) j["per_reference"] = s.per_reference;
}

inline void from_json(const nlohmann::json& j, QaceScore& s) {
  s.defined = j.at("defined").get<bool>();
  s.M = j.at("M").get<std::size_t>();
  s.qace = j.at("qace").is_null() ? 0.0 : j.at("qace").get<double>();
  s.qace_f1 = ReadOptionalNumber(j, "qace_f1");
  s.qace_embedding = ReadOptionalNumber(j, "qace_embedding");
  s.qace_answerability = ReadOptionalNumber(j, "qace_answerability");
  s.per_question = j.value("per_question", std::vector<QuestionResult>{});
  s.per_reference = j.value("per_reference", std::vector<QaceScore>{});
}

inline std::string IdString(const nlohmann::json& id) {
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<std::int64_t>());
  throw Error(ErrorKind::kSchemaViolation, "id must be a string or integer");
}

inline void from_json(const nlohmann::json& j, EvaluationInstance& e) {
  e.instance_id = IdString(j.at("instance_id"));
  e.candidate = j.at("candidate").get<std::string>();
  e.references.clear();
  if (j.contains("references") && !j.at("references").is_null()) {
    e.references = j.at("references").get<std::vector<std::string>>();
  }
  e.image_id.reset();
  if (j.contains("image_id") && !j.at("image_id").is_null()) {
    e.image_id = IdString(j.at("image_id"));
  }
  e.human_score = ReadOptionalNumber(j, "human_score");
}

inline void to_json(nlohmann::json& j, const EvaluationInstance& e) {
  j = nlohmann::json{{"instance_id", e.instance_id},
                     {"candidate", e.candidate},
                     {"references", e.references},
                     {"image_id", e.image_id ? nlohmann::json(*e.image_id)
                                             : nlohmann::json(nullptr)},
                     {"human_score", OptionalNumber(e.human_score)}};
}

}  // namespace qace
