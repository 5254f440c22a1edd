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

// Synthetic abstractive-VQA data from captioned images.
//
// Every caption yields (question, noun phrase) pairs; a pair survives only if
// textual QA on the caption gives back the same answer (round trip). Kept
// pairs are attached to the caption's image. Unanswerable examples pair a
// kept question with a different image and the literal answer
// "unanswerable".

#pragma once

#include <atomic>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "qace/answer_sim.hpp"
#include "qace/error.hpp"
#include "qace/gateway.hpp"
#include "qace/rng.hpp"
#include "qace/scorer.hpp"
#include "qace/span_extract.hpp"

namespace qace {

struct CaptionedImage {
  std::string image_id;
  std::vector<std::string> captions;
};

struct QaPair {
  std::string question;
  AnswerSpan answer;
};

struct SyntheticTriple {
  std::string question;
  std::string answer;
  std::string image_id;
  // Answerable: where the pair came from.
  std::optional<std::string> source_caption;
  std::optional<AnswerSpan> source_span;
  // Unanswerable: the image the question was generated for.
  std::optional<std::string> negative_sampled_from;

  bool answerable() const { return !negative_sampled_from.has_value(); }
  bool operator==(const SyntheticTriple&) const = default;
};

struct RoundTripDetail {
  std::string question;
  std::string expected;
  std::string predicted;
  bool kept = false;
};

struct CaptionReport {
  std::string image_id;
  std::string caption;
  std::size_t generated = 0;
  std::size_t kept = 0;
  std::size_t filtered = 0;
  std::vector<RoundTripDetail> details;
};

struct RoundTripReport {
  std::size_t generated = 0;
  std::size_t kept = 0;
  std::size_t filtered = 0;
  std::vector<CaptionReport> captions;

  void Add(CaptionReport caption) {
    generated += caption.generated;
    kept += caption.kept;
    filtered += caption.filtered;
    captions.push_back(std::move(caption));
  }
};

// Round-trip predicate: exact match of normalized answers, or token F1 at or
// above a threshold.
struct MatchRule {
  std::optional<double> f1_threshold;

  static MatchRule Parse(std::string_view spec) {
    if (spec == "exact") return {};
    if (spec.rfind("f1:", 0) == 0) {
      try {
        const double t = std::stod(std::string(spec.substr(3)));
        if (t < 0.0 || t > 1.0) throw std::out_of_range("threshold");
        return {t};
      } catch (const std::exception&) {
      }
    }
    throw Error(ErrorKind::kConfigError,
                "--match must be exact or f1:<threshold in [0,1]>");
  }

  bool Accepts(std::string_view predicted, std::string_view expected) const {
    if (f1_threshold) return TokenF1(predicted, expected) >= *f1_threshold;
    return NormalizeAnswer(predicted).tokens == NormalizeAnswer(expected).tokens;
  }
};

// How the unanswerable ratio is read: as a fraction of the final set, or
// relative to the number of answerable triples.
enum class RatioBase { kFinal, kAnswerable };

struct SyntheticOptions {
  double unanswerable_ratio = 0.2;
  RatioBase ratio_base = RatioBase::kFinal;
  std::uint64_t seed = 0;
  MatchRule match;
  const Lexicon* lexicon = nullptr;
  std::size_t workers = 4;
};

inline std::size_t UnanswerableCount(std::size_t answerable, double ratio,
                                     RatioBase base) {
  if (ratio <= 0.0) return 0;
  const double a = static_cast<double>(answerable);
  const double target =
      base == RatioBase::kFinal ? ratio * a / (1.0 - ratio) : ratio * a;
  return static_cast<std::size_t>(std::llround(target));
}

inline std::vector<QaPair> BuildQaPairs(const std::string& caption,
                                        Gateway& gateway,
                                        const Lexicon& lexicon = Lexicon::Default()) {
  std::vector<AnswerSpan> spans;
  try {
    spans = ExtractAnswerSpans(caption, lexicon);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kEmptyCaption) throw;
  }
  if (spans.empty()) {
    spdlog::info("skipping caption without noun phrases: '{}'", caption);
    return {};
  }
  const auto set = gateway.GenerateQuestions("", caption, spans);
  std::vector<QaPair> pairs;
  pairs.reserve(set.M());
  for (const auto& q : set.questions) pairs.push_back({q.question, q.source_span});
  return pairs;
}

inline std::pair<std::vector<QaPair>, CaptionReport> RoundTripFilter(
    const std::vector<QaPair>& pairs, const std::string& caption,
    Gateway& gateway, const MatchRule& rule = {}) {
  CaptionReport report;
  report.caption = caption;
  std::vector<QaPair> kept;
  for (const auto& pair : pairs) {
    const auto predicted =
        gateway.AnswerText(pair.question, caption, ContextKind::kReference);
    RoundTripDetail detail{pair.question, pair.answer.text,
                           predicted.answer_text, false};
    detail.kept = rule.Accepts(predicted.answer_text, pair.answer.text);
    ++report.generated;
    if (detail.kept) {
      ++report.kept;
      kept.push_back(pair);
    } else {
      ++report.filtered;
    }
    report.details.push_back(std::move(detail));
  }
  return {std::move(kept), std::move(report)};
}

// Replays the round trip for an answerable triple (a cache hit after
// AssembleDataset ran with the same cache).
inline bool VerifyRoundTrip(const SyntheticTriple& triple, Gateway& gateway,
                            const MatchRule& rule = {}) {
  if (!triple.answerable() || !triple.source_caption || !triple.source_span) {
    return false;
  }
  const auto predicted = gateway.AnswerText(
      triple.question, *triple.source_caption, ContextKind::kReference);
  return triple.answer == triple.source_span->text &&
         rule.Accepts(predicted.answer_text, triple.answer);
}

struct SyntheticDataset {
  std::vector<SyntheticTriple> triples;
  RoundTripReport report;
};

inline SyntheticDataset AssembleDataset(const std::vector<CaptionedImage>& corpus,
                                        Gateway& gateway,
                                        const SyntheticOptions& options) {
  if (corpus.empty()) throw Error(ErrorKind::kConfigError, "empty corpus");
  if (!(options.unanswerable_ratio >= 0.0 && options.unanswerable_ratio < 1.0)) {
    throw Error(ErrorKind::kConfigError, "unanswerable ratio must be in [0,1)");
  }
  std::set<std::string> ids;
  for (const auto& image : corpus) {
    if (!ids.insert(image.image_id).second) {
      throw Error(ErrorKind::kSchemaViolation,
                  "duplicate image_id " + image.image_id);
    }
    if (image.captions.empty()) {
      throw Error(ErrorKind::kSchemaViolation,
                  "image " + image.image_id + " has no captions");
    }
  }
  if (options.unanswerable_ratio > 0.0 && corpus.size() < 2) {
    throw Error(ErrorKind::kNegativeSamplingImpossible,
                "a single-image corpus has no unpaired image to sample");
  }
  const Lexicon& lexicon = options.lexicon ? *options.lexicon : Lexicon::Default();

  // One job per (image, caption); results land in corpus order.
  struct Job {
    std::size_t image;
    const std::string* caption;
    std::vector<QaPair> kept;
    CaptionReport report;
    std::string error;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& caption : corpus[i].captions) jobs.push_back({i, &caption, {}, {}, {}});
  }
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t k = next.fetch_add(1); k < jobs.size(); k = next.fetch_add(1)) {
      auto& job = jobs[k];
      try {
        auto pairs = BuildQaPairs(*job.caption, gateway, lexicon);
        auto [kept, report] = RoundTripFilter(pairs, *job.caption, gateway, options.match);
        report.image_id = corpus[job.image].image_id;
        job.kept = std::move(kept);
        job.report = std::move(report);
      } catch (const std::exception& e) {
        job.error = e.what();
      }
    }
  };
  {
    const std::size_t threads =
        std::min(std::max<std::size_t>(1, options.workers), jobs.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }

  SyntheticDataset dataset;
  std::vector<std::size_t> source_image;  // per answerable triple
  for (auto& job : jobs) {
    if (!job.error.empty()) {
      throw Error(ErrorKind::kBackendUnavailable,
                  "caption '" + *job.caption + "': " + job.error);
    }
    for (auto& pair : job.kept) {
      SyntheticTriple t;
      t.question = pair.question;
      t.answer = pair.answer.text;
      t.image_id = corpus[job.image].image_id;
      t.source_caption = *job.caption;
      t.source_span = pair.answer;
      dataset.triples.push_back(std::move(t));
      source_image.push_back(job.image);
    }
    dataset.report.Add(std::move(job.report));
  }

  Rng rng(options.seed);
  const std::size_t answerable = dataset.triples.size();
  const std::size_t negatives = answerable == 0 ? 0
      : UnanswerableCount(answerable, options.unanswerable_ratio, options.ratio_base);
  for (std::size_t k = 0; k < negatives; ++k) {
    const auto q = static_cast<std::size_t>(rng.Index(answerable));
    const std::size_t source = source_image[q];
    auto other = static_cast<std::size_t>(rng.Index(corpus.size() - 1));
    if (other >= source) ++other;
    SyntheticTriple t;
    t.question = dataset.triples[q].question;
    t.answer = std::string(kUnanswerable);
    t.image_id = corpus[other].image_id;
    t.negative_sampled_from = corpus[source].image_id;
    dataset.triples.push_back(std::move(t));
  }
  rng.Shuffle(dataset.triples);
  return dataset;
}

struct SplitResult {
  std::vector<SyntheticTriple> train;
  std::vector<SyntheticTriple> validation;
};

// Image-grouped split: whole images go to train until it holds round(n*f)
// triples; input order is kept within each side.
inline SplitResult Split(const std::vector<SyntheticTriple>& dataset,
                         double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kConfigError, "train fraction must be in (0,1)");
  }
  std::vector<std::string> images;
  std::map<std::string, std::size_t> group_size;
  for (const auto& t : dataset) {
    if (group_size[t.image_id]++ == 0) images.push_back(t.image_id);
  }
  Rng rng(seed);
  rng.Shuffle(images);
  const auto target = static_cast<std::size_t>(
      std::llround(static_cast<double>(dataset.size()) * train_fraction));
  std::set<std::string> train_images;
  std::size_t in_train = 0;
  for (const auto& image : images) {
    if (in_train >= target) break;
    train_images.insert(image);
    in_train += group_size[image];
  }
  SplitResult split;
  for (const auto& t : dataset) {
    (train_images.count(t.image_id) ? split.train : split.validation).push_back(t);
  }
  return split;
}

// ---- JSON ---------------------------------------------------------------

inline void from_json(const nlohmann::json& j, CaptionedImage& c) {
  c.image_id = IdString(j.at("image_id"));
  c.captions = j.at("captions").get<std::vector<std::string>>();
}

inline void to_json(nlohmann::json& j, const SyntheticTriple& t) {
  nlohmann::json provenance;
  if (t.answerable()) {
    provenance = {{"source_caption", t.source_caption.value_or("")},
                  {"source_span", t.source_span ? nlohmann::json(*t.source_span)
                                                : nlohmann::json(nullptr)}};
  } else {
    provenance = {{"negative_sampled_from", *t.negative_sampled_from}};
  }
  j = nlohmann::json{{"question", t.question},
                     {"answer", t.answer},
                     {"image_id", t.image_id},
                     {"answerable", t.answerable()},
                     {"provenance", provenance}};
}

inline void from_json(const nlohmann::json& j, SyntheticTriple& t) {
  t.question = j.at("question").get<std::string>();
  t.answer = j.at("answer").get<std::string>();
  t.image_id = j.at("image_id").get<std::string>();
  const auto& p = j.at("provenance");
  t.source_caption.reset();
  t.source_span.reset();
  t.negative_sampled_from.reset();
  if (p.contains("negative_sampled_from")) {
    t.negative_sampled_from = p.at("negative_sampled_from").get<std::string>();
  } else {
    t.source_caption = p.at("source_caption").get<std::string>();
    if (!p.at("source_span").is_null()) t.source_span = p.at("source_span").get<AnswerSpan>();
  }
}

inline void to_json(nlohmann::json& j, const RoundTripReport& r) {
  nlohmann::json captions = nlohmann::json::array();
  for (const auto& c : r.captions) {
    nlohmann::json details = nlohmann::json::array();
    for (const auto& d : c.details) {
      details.push_back({{"question", d.question},
                         {"expected", d.expected},
                         {"predicted", d.predicted},
                         {"kept", d.kept}});
    }
    captions.push_back({{"image_id", c.image_id},
                        {"caption", c.caption},
                        {"generated", c.generated},
                        {"kept", c.kept},
                        {"filtered", c.filtered},
                        {"pairs", details}});
  }
  j = nlohmann::json{{"generated", r.generated},
                     {"kept", r.kept},
                     {"filtered", r.filtered},
                     {"captions", captions}};
}

}  // namespace qace
