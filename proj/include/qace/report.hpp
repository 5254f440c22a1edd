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

// Markdown case-study reports: for every instance, the generated questions
// with the answer found in the candidate next to the answers found in each
// context, the per-question similarity components and the final scores.
// Numbers are copied from stored scores; the only computation is the affine
// rescale of human judgments onto [0, 1].

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qace/error.hpp"
#include "qace/meta_eval.hpp"
#include "qace/scorer.hpp"

namespace qace {

struct ScoredContext {
  std::string label;   // "image img_1", "reference 1", ...
  std::string mode;    // ref | img
  QaceScore score;     // single-context score (per_question filled)
};

struct CaseStudyRecord {
  std::string instance_id;
  std::string candidate;
  std::optional<std::string> image_id;
  std::vector<std::string> references;
  std::vector<ScoredContext> contexts;
  std::vector<std::pair<std::string, QaceScore>> final_scores;  // by mode
  std::optional<double> normalized_human;
  // Rows are shared across contexts when every context asked the same
  // questions; otherwise each context gets its own table.
  bool shared_rows = true;
};

// One score line: {"instance_id", "mode", "score", ...QaceScore}.
struct ScoreLine {
  std::string instance_id;
  std::string mode;
  QaceScore score;
};

inline nlohmann::json ToScoreLine(const std::string& instance_id, ScoreMode mode,
                                  const QaceScore& score) {
  nlohmann::json j = score;
  j["instance_id"] = instance_id;
  j["mode"] = ScoreModeName(mode);
  j["score"] = score.defined ? nlohmann::json(score.qace) : nlohmann::json(nullptr);
  return j;
}

inline std::vector<ScoreLine> LoadScoreLines(const std::string& path) {
  std::vector<ScoreLine> out;
  ReadJsonLines(path, [&](const nlohmann::json& r, std::size_t) {
    if (r.contains("provenance")) return;
    out.push_back({IdString(r.at("instance_id")), r.value("mode", std::string("ref")),
                   r.get<QaceScore>()});
  });
  return out;
}

inline std::vector<ScoredContext> ExpandContexts(const EvaluationInstance& instance,
                                                 const ScoreLine& line) {
  std::vector<ScoredContext> out;
  if (line.mode == "img") {
    out.push_back({"image " + instance.image_id.value_or("?"), line.mode, line.score});
  } else if (!line.score.per_reference.empty()) {
    for (std::size_t r = 0; r < line.score.per_reference.size(); ++r) {
      out.push_back({"reference " + std::to_string(r + 1), line.mode,
                     line.score.per_reference[r]});
    }
  } else {
    out.push_back({"reference", line.mode, line.score});
  }
  return out;
}

inline std::vector<CaseStudyRecord> BuildCaseStudies(
    const std::vector<EvaluationInstance>& instances,
    const std::vector<ScoreLine>& lines, std::optional<HumanRange> range) {
  std::map<std::string, const EvaluationInstance*> by_id;
  for (const auto& i : instances) by_id[i.instance_id] = &i;

  std::vector<std::string> order;
  std::map<std::string, CaseStudyRecord> records;
  std::string missing;
  for (const auto& line : lines) {
    const auto it = by_id.find(line.instance_id);
    if (it == by_id.end()) {
      missing += (missing.empty() ? "" : ", ") + line.instance_id;
      continue;
    }
    const auto& instance = *it->second;
    auto [rec, inserted] = records.try_emplace(line.instance_id);
    if (inserted) {
      order.push_back(line.instance_id);
      rec->second.instance_id = instance.instance_id;
      rec->second.candidate = instance.candidate;
      rec->second.image_id = instance.image_id;
      rec->second.references = instance.references;
      if (range && instance.human_score) {
        rec->second.normalized_human = range->Normalize(*instance.human_score);
      }
    }
    for (auto& ctx : ExpandContexts(instance, line)) {
      rec->second.contexts.push_back(std::move(ctx));
    }
    rec->second.final_scores.emplace_back(line.mode, line.score);
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kAlignmentError,
                "scores without a matching instance: " + missing);
  }

  std::vector<CaseStudyRecord> out;
  for (const auto& id : order) {
    auto& rec = records[id];
    const auto& first = rec.contexts.front().score.per_question;
    for (const auto& ctx : rec.contexts) {
      const auto& pq = ctx.score.per_question;
      bool same = pq.size() == first.size();
      for (std::size_t q = 0; same && q < pq.size(); ++q) {
        same = pq[q].question == first[q].question &&
               pq[q].answer_on_candidate.answer_text ==
                   first[q].answer_on_candidate.answer_text;
      }
      rec.shared_rows = rec.shared_rows && same;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace internal {

inline std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

inline std::string Fixed(const std::optional<double>& v) {
  return v ? Fixed(*v) : "n/a";
}

inline std::string Cell(std::string text) {
  std::string out;
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

inline void ComponentTable(std::ostringstream& md, const ScoredContext& ctx) {
  md << "| # | Question | Candidate answer | " << Cell(ctx.label)
     << " answer | F1 | Embedding | Answerability | Mean |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  for (std::size_t q = 0; q < ctx.score.per_question.size(); ++q) {
    const auto& r = ctx.score.per_question[q];
    md << "| " << q + 1 << " | " << Cell(r.question) << " | "
       << Cell(r.answer_on_candidate.answer_text) << " | "
       << Cell(r.answer_on_context.answer_text) << " | " << Fixed(r.breakdown.f1)
       << " | " << Fixed(r.breakdown.embedding) << " | "
       << Fixed(r.breakdown.answerability) << " | " << Fixed(r.breakdown.mean)
       << " |\n";
  }
  md << "\n";
}

}  // namespace internal

inline std::string RenderMarkdown(const std::vector<CaseStudyRecord>& records,
                                  const nlohmann::json& provenance = nullptr) {
  using internal::Cell;
  using internal::Fixed;
  std::ostringstream md;
  md << "# QACE case study report\n\n";
  if (!provenance.is_null()) {
    md << "<details><summary>Provenance</summary>\n\n```json\n"
       << provenance.dump(2) << "\n```\n\n</details>\n\n";
  }
  for (const auto& rec : records) {
    md << "## " << Cell(rec.instance_id) << "\n\n";
    md << "**Candidate:** " << Cell(rec.candidate) << "\n\n";
    if (rec.image_id) md << "**Image:** `" << *rec.image_id << "`\n\n";
    for (std::size_t r = 0; r < rec.references.size(); ++r) {
      md << "**Reference " << r + 1 << ":** " << Cell(rec.references[r]) << "\n\n";
    }
    if (rec.normalized_human) {
      md << "**Human judgment (0-1):** " << Fixed(*rec.normalized_human) << "\n\n";
    }

    const bool any_questions = std::any_of(
        rec.contexts.begin(), rec.contexts.end(),
        [](const ScoredContext& c) { return c.score.defined; });
    if (!any_questions) {
      md << "> **No questions generated:** the candidate has no noun phrase, so "
            "QACE is undefined for this instance.\n\n";
    } else if (rec.shared_rows && rec.contexts.size() > 1) {
      md << "| # | Question | Candidate answer |";
      for (const auto& ctx : rec.contexts) md << " " << Cell(ctx.label) << " answer |";
      md << "\n|---|---|---|";
      for (std::size_t c = 0; c < rec.contexts.size(); ++c) md << "---|";
      md << "\n";
      const auto& first = rec.contexts.front().score.per_question;
      for (std::size_t q = 0; q < first.size(); ++q) {
        md << "| " << q + 1 << " | " << Cell(first[q].question) << " | "
           << Cell(first[q].answer_on_candidate.answer_text) << " |";
        for (const auto& ctx : rec.contexts) {
          md << " " << Cell(ctx.score.per_question[q].answer_on_context.answer_text)
             << " |";
        }
        md << "\n";
      }
      md << "\n";
      for (const auto& ctx : rec.contexts) {
        md << "### " << Cell(ctx.label) << "\n\n";
        internal::ComponentTable(md, ctx);
      }
    } else {
      for (const auto& ctx : rec.contexts) {
        md << "### " << Cell(ctx.label) << "\n\n";
        internal::ComponentTable(md, ctx);
      }
    }

    md << "| Score | QACE | F1 | Embedding | Answerability |\n"
       << "|---|---|---|---|---|\n";
    for (const auto& [mode, score] : rec.final_scores) {
      md << "| QACE-" << (mode == "img" ? "Img" : "Ref") << " | "
         << (score.defined ? Fixed(score.qace) : std::string("undefined")) << " | "
         << Fixed(score.qace_f1) << " | " << Fixed(score.qace_embedding) << " | "
         << Fixed(score.qace_answerability) << " |\n";
    }
    md << "\n";
  }
  return md.str();
}

}  // namespace qace
