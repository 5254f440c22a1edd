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

// Meta-evaluation against human judgments: benchmark loaders, Kendall tau-b
// with a t-test, and Pascal50s pairwise accuracy.

#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "qace/error.hpp"
#include "qace/scorer.hpp"
#include "qace/stats.hpp"

namespace qace {

enum class RatedSchema { kComposite, kFlickr8k, kGeneric };

inline RatedSchema ParseRatedSchema(std::string_view name) {
  if (name == "composite") return RatedSchema::kComposite;
  if (name == "flickr8k") return RatedSchema::kFlickr8k;
  if (name == "generic") return RatedSchema::kGeneric;
  throw Error(ErrorKind::kConfigError,
              "schema must be composite, flickr8k or generic");
}

struct HumanRange {
  double low = 0.0;
  double high = 1.0;

  // Affine map onto [0, 1].
  double Normalize(double value) const { return (value - low) / (high - low); }
};

// Declared judgment scales of the benchmarks.
inline std::optional<HumanRange> DefaultHumanRange(RatedSchema schema) {
  switch (schema) {
    case RatedSchema::kComposite: return HumanRange{1.0, 5.0};
    case RatedSchema::kFlickr8k: return HumanRange{1.0, 4.0};
    case RatedSchema::kGeneric: return std::nullopt;
  }
  return std::nullopt;
}

struct RatedPair {
  std::string instance_id;
  double metric_score = 0.0;
  double human_score = 0.0;

  bool operator==(const RatedPair&) const = default;
};

// One benchmark record: what to score plus the human judgment, and a metric
// score when the file already carries one (generic schema).
struct JudgedInstance {
  EvaluationInstance instance;
  double human_score = 0.0;
  std::optional<double> metric_score;
};

enum class HumanChoice { kB, kC };

struct Pascal50sTriplet {
  std::string triplet_id;
  std::vector<std::string> references;
  std::string candidate_b;
  std::string candidate_c;
  HumanChoice human_choice = HumanChoice::kB;
};

enum class StatisticKind { kKendallTauB, kAccuracy, kPearson };

inline std::string_view StatisticKindName(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::kKendallTauB: return "kendall_tau_b";
    case StatisticKind::kAccuracy: return "accuracy";
    case StatisticKind::kPearson: return "pearson";
  }
  return "unknown";
}

struct CorrelationResult {
  StatisticKind statistic_kind = StatisticKind::kKendallTauB;
  double value = 0.0;
  std::size_t n = 0;
  std::optional<double> t_statistic;
  std::optional<double> p_value;
  bool p_exact = false;
};

// ---- statistics -----------------------------------------------------------

namespace internal {

inline void AttachSignificance(CorrelationResult& result) {
  if (result.n < 3) return;
  const auto test = stats::CorrelationTTest(result.value, result.n);
  result.t_statistic = test.t;
  result.p_value = test.p;
  result.p_exact = test.exact;
}

}  // namespace internal

inline CorrelationResult KendallTau(std::span<const double> xs,
                                    std::span<const double> ys) {
  CorrelationResult result;
  result.statistic_kind = StatisticKind::kKendallTauB;
  result.value = stats::KendallTauB(xs, ys);
  result.n = xs.size();
  internal::AttachSignificance(result);
  return result;
}

inline CorrelationResult PearsonCorrelation(std::span<const double> xs,
                                            std::span<const double> ys) {
  CorrelationResult result;
  result.statistic_kind = StatisticKind::kPearson;
  result.value = stats::Pearson(xs, ys);
  result.n = xs.size();
  internal::AttachSignificance(result);
  return result;
}

inline CorrelationResult KendallTau(const std::vector<RatedPair>& pairs) {
  std::vector<double> metric, human;
  for (const auto& p : pairs) {
    metric.push_back(p.metric_score);
    human.push_back(p.human_score);
  }
  return KendallTau(metric, human);
}

enum class TiePolicy { kIncorrect, kHalf };

// Fraction of triplets where the higher-scored candidate is the one humans
// chose. Scores are keyed by triplet_id.
inline CorrelationResult Pascal50sAccuracy(
    const std::vector<Pascal50sTriplet>& triplets,
    const std::map<std::string, double>& scores_b,
    const std::map<std::string, double>& scores_c,
    TiePolicy ties = TiePolicy::kIncorrect) {
  std::vector<std::string> missing;
  double correct = 0.0;
  for (const auto& t : triplets) {
    const auto b = scores_b.find(t.triplet_id);
    const auto c = scores_c.find(t.triplet_id);
    if (b == scores_b.end() || c == scores_c.end()) {
      missing.push_back(t.triplet_id);
      continue;
    }
    if (b->second == c->second) {
      if (ties == TiePolicy::kHalf) correct += 0.5;
      continue;
    }
    const HumanChoice metric_choice =
        b->second > c->second ? HumanChoice::kB : HumanChoice::kC;
    if (metric_choice == t.human_choice) correct += 1.0;
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw Error(ErrorKind::kRecordError, "missing scores for triplets: " + ids);
  }
  CorrelationResult result;
  result.statistic_kind = StatisticKind::kAccuracy;
  result.n = triplets.size();
  result.value = triplets.empty() ? 0.0 : correct / static_cast<double>(triplets.size());
  return result;
}

// ---- loaders --------------------------------------------------------------

// Calls `fn(record, line_number)` for every non-blank line; JSON errors become
// SchemaViolation with the line number.
inline void ReadJsonLines(
    const std::string& path,
    const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfigError, "cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaViolation(line_no, path + ": " + e.what());
    }
    if (!record.is_object()) throw SchemaViolation(line_no, path + ": not an object");
    try {
      fn(record, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaViolation(line_no, path + ": " + e.what());
    }
  }
}

namespace internal {

inline double NumberField(const nlohmann::json& record, const char* key,
                          std::size_t line) {
  if (!record.contains(key)) {
    throw SchemaViolation(line, std::string("missing field '") + key + "'");
  }
  const auto& v = record.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>())) {
    throw Error(ErrorKind::kRecordError, "line " + std::to_string(line) +
                                             ": non-numeric " + key);
  }
  return v.get<double>();
}

}  // namespace internal

inline std::vector<JudgedInstance> LoadRatedDataset(const std::string& path,
                                                    RatedSchema schema) {
  std::vector<JudgedInstance> out;
  std::set<std::string> ids;
  ReadJsonLines(path, [&](const nlohmann::json& r, std::size_t line) {
    JudgedInstance judged;
    if (!r.contains("instance_id")) throw SchemaViolation(line, "missing instance_id");
    if (schema == RatedSchema::kGeneric) {
      judged.instance.instance_id = IdString(r.at("instance_id"));
      judged.metric_score = internal::NumberField(r, "metric_score", line);
      judged.human_score = internal::NumberField(r, "human_score", line);
    } else {
      if (!r.contains("candidate")) throw SchemaViolation(line, "missing candidate");
      judged.instance = r.get<EvaluationInstance>();
      if (schema == RatedSchema::kFlickr8k && r.contains("judgments")) {
        const auto& js = r.at("judgments");
        if (!js.is_array() || js.empty()) {
          throw SchemaViolation(line, "judgments must be a non-empty array");
        }
        double sum = 0.0;
        for (const auto& j : js) {
          if (!j.is_number()) {
            throw Error(ErrorKind::kRecordError,
                        "line " + std::to_string(line) + ": non-numeric judgment");
          }
          sum += j.get<double>();
        }
        judged.human_score = sum / static_cast<double>(js.size());
      } else {
        judged.human_score = internal::NumberField(r, "human_score", line);
      }
      judged.instance.human_score = judged.human_score;
    }
    if (!ids.insert(judged.instance.instance_id).second) {
      throw SchemaViolation(line, "duplicate instance_id " + judged.instance.instance_id);
    }
    out.push_back(std::move(judged));
  });
  return out;
}

inline std::vector<RatedPair> ToRatedPairs(const std::vector<JudgedInstance>& judged) {
  std::vector<RatedPair> out;
  for (const auto& j : judged) {
    if (!j.metric_score) {
      throw Error(ErrorKind::kRecordError,
                  "no metric score for " + j.instance.instance_id);
    }
    out.push_back({j.instance.instance_id, *j.metric_score, j.human_score});
  }
  return out;
}

inline nlohmann::json ToGenericRecord(const RatedPair& p) {
  return {{"instance_id", p.instance_id},
          {"metric_score", p.metric_score},
          {"human_score", p.human_score}};
}

inline std::vector<Pascal50sTriplet> LoadPascal50s(const std::string& path) {
  std::vector<Pascal50sTriplet> out;
  ReadJsonLines(path, [&](const nlohmann::json& r, std::size_t line) {
    for (const char* key : {"triplet_id", "references", "candidate_b",
                            "candidate_c", "human_choice"}) {
      if (!r.contains(key)) {
        throw SchemaViolation(line, std::string("missing field '") + key + "'");
      }
    }
    Pascal50sTriplet t;
    t.triplet_id = IdString(r.at("triplet_id"));
    t.references = r.at("references").get<std::vector<std::string>>();
    if (t.references.empty()) throw SchemaViolation(line, "no references");
    t.candidate_b = r.at("candidate_b").get<std::string>();
    t.candidate_c = r.at("candidate_c").get<std::string>();
    const auto choice = r.at("human_choice").get<std::string>();
    if (choice == "B" || choice == "b") {
      t.human_choice = HumanChoice::kB;
    } else if (choice == "C" || choice == "c") {
      t.human_choice = HumanChoice::kC;
    } else {
      throw SchemaViolation(line, "human_choice must be B or C");
    }
    out.push_back(std::move(t));
  });
  return out;
}

// Candidate ids under which Pascal50s captions are scored.
inline std::string PascalCandidateId(const std::string& triplet_id, HumanChoice side) {
  return triplet_id + (side == HumanChoice::kB ? "/B" : "/C");
}

inline std::vector<EvaluationInstance> PascalInstances(
    const std::vector<Pascal50sTriplet>& triplets) {
  std::vector<EvaluationInstance> out;
  for (const auto& t : triplets) {
    out.push_back({PascalCandidateId(t.triplet_id, HumanChoice::kB), t.candidate_b,
                   t.references, std::nullopt, std::nullopt});
    out.push_back({PascalCandidateId(t.triplet_id, HumanChoice::kC), t.candidate_c,
                   t.references, std::nullopt, std::nullopt});
  }
  return out;
}

// {"instance_id", "score"} lines. A null score (no questions could be asked)
// counts as 0.0; lines carrying a "provenance" block are skipped.
inline std::map<std::string, double> LoadScoreFile(const std::string& path) {
  std::map<std::string, double> scores;
  std::size_t undefined = 0;
  ReadJsonLines(path, [&](const nlohmann::json& r, std::size_t line) {
    if (r.contains("provenance")) return;
    if (!r.contains("instance_id") || !r.contains("score")) {
      throw SchemaViolation(line, "score lines need instance_id and score");
    }
    const auto id = IdString(r.at("instance_id"));
    double value = 0.0;
    if (r.at("score").is_null()) {
      ++undefined;
    } else {
      value = internal::NumberField(r, "score", line);
    }
    if (!scores.emplace(id, value).second) {
      throw SchemaViolation(line, "duplicate instance_id " + id);
    }
  });
  if (undefined > 0) {
    spdlog::warn("{}: {} undefined scores counted as 0.0", path, undefined);
  }
  return scores;
}

// Pairs every judged instance with its metric score; any id present on only
// one side is an AlignmentError listing the offenders.
inline std::vector<RatedPair> Align(const std::vector<JudgedInstance>& judged,
                                    const std::map<std::string, double>& scores) {
  std::vector<RatedPair> out;
  std::set<std::string> seen;
  std::string missing;
  for (const auto& j : judged) {
    const auto& id = j.instance.instance_id;
    seen.insert(id);
    const auto it = scores.find(id);
    if (it == scores.end()) {
      missing += (missing.empty() ? "" : ", ") + id;
      continue;
    }
    out.push_back({id, it->second, j.human_score});
  }
  std::string extra;
  for (const auto& [id, _] : scores) {
    if (!seen.count(id)) extra += (extra.empty() ? "" : ", ") + id;
  }
  if (!missing.empty() || !extra.empty()) {
    throw Error(ErrorKind::kAlignmentError,
                "no score for [" + missing + "]; no judgment for [" + extra + "]");
  }
  return out;
}

inline void to_json(nlohmann::json& j, const CorrelationResult& r) {
  j = nlohmann::json{{"statistic_kind", StatisticKindName(r.statistic_kind)},
                     {"value", r.value},
                     {"n", r.n},
                     {"t_statistic", nullptr},
                     {"p_value", OptionalNumber(r.p_value)}};
  if (r.t_statistic) {
    // JSON has no infinity; |r| = 1 reports t as a signed string.
    j["t_statistic"] = std::isfinite(*r.t_statistic)
                           ? nlohmann::json(*r.t_statistic)
                           : nlohmann::json(*r.t_statistic > 0 ? "inf" : "-inf");
  }
  if (r.p_exact) j["p_exact"] = true;
}

}  // namespace qace
