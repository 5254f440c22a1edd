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

// qace: score captions, correlate scores with human judgments, build
// synthetic VQA data and render case-study reports.
//
// Exit codes: 0 success, 1 data or partial failure, 2 configuration error.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "qace/qace.hpp"

namespace {

using qace::Error;
using qace::ErrorKind;
using qace::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

// Command-line values land here and are copied into the RunConfig only when
// the flag was given, so they override the config file.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> options;

  void Add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    options.emplace_back(app->add_option(flag, values[key], help), key);
  }

  void ApplyTo(RunConfig& config) const {
    for (const auto& [option, key] : options) {
      if (option->count() > 0) config.Set(key, values.at(key));
    }
  }
};

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kConfigError, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorKind::kConfigError, "cannot write " + path);
}

template <typename T>
std::vector<T> ReadRecords(const std::string& path) {
  std::vector<T> out;
  qace::ReadJsonLines(path, [&](const nlohmann::json& r, std::size_t) {
    out.push_back(r.get<T>());
  });
  return out;
}

// Backend, cache and gateway for one run.
struct Engine {
  std::unique_ptr<qace::Backend> backend;
  std::unique_ptr<qace::ResponseCache> cache;
  std::unique_ptr<qace::Gateway> gateway;
  std::optional<qace::Lexicon> lexicon;

  explicit Engine(const RunConfig& config) {
    backend = qace::MakeBackend(config.Require("backend"), config.Get("backend_id"));
    if (config.Has("cache_dir")) {
      cache = std::make_unique<qace::ResponseCache>(config.Get("cache_dir"));
    }
    qace::GatewayOptions options;
    options.max_in_flight = config.GetUnsigned("max_in_flight", 8);
    options.clamp_similarity = config.GetBool("similarity.clamp", true);
    gateway = std::make_unique<qace::Gateway>(*backend, cache.get(), options);
    if (config.Has("lexicon")) lexicon = qace::Lexicon::Load(config.Get("lexicon"));
  }

  const qace::Lexicon* lexicon_ptr() const { return lexicon ? &*lexicon : nullptr; }

  nlohmann::json Provenance(const RunConfig& config) const {
    nlohmann::json p = {{"config", config.ToJson()}, {"backend_id", backend->id()}};
    p["cache_digest"] = cache ? nlohmann::json(cache->TouchedDigest()) : nlohmann::json(nullptr);
    return p;
  }
};

qace::ScorerConfig ScorerConfigFrom(const RunConfig& config, const Engine& engine) {
  qace::ScorerConfig sc;
  if (config.Has("similarity.components")) {
    sc.similarity = qace::SimilarityConfig::WithComponents(config.Get("similarity.components"));
  }
  sc.similarity.answerability_side =
      qace::ParseAnswerabilitySide(config.Get("answerability.side", "context"));
  const auto candidate = config.Get("candidate_answer", "qa");
  if (candidate == "qa") {
    sc.candidate_answer = qace::CandidateAnswer::kQa;
  } else if (candidate == "span") {
    sc.candidate_answer = qace::CandidateAnswer::kSpan;
  } else {
    throw Error(ErrorKind::kConfigError, "candidate_answer must be qa or span");
  }
  const auto form = config.Get("answer_form", "span");
  if (form == "span") {
    sc.answer_form = qace::AnswerForm::kSpan;
  } else if (form == "head") {
    sc.answer_form = qace::AnswerForm::kHead;
  } else {
    throw Error(ErrorKind::kConfigError, "answer_form must be span or head");
  }
  const auto spans = config.Get("spans.source", "builtin");
  if (spans == "builtin") {
    sc.span_source = qace::SpanSource::kBuiltin;
  } else if (spans == "backend") {
    sc.span_source = qace::SpanSource::kBackend;
  } else {
    throw Error(ErrorKind::kConfigError, "spans.source must be builtin or backend");
  }
  sc.lexicon = engine.lexicon_ptr();
  sc.workers = config.GetUnsigned("workers", 4);
  sc.refs_per_instance = config.GetUnsigned("refs_per_instance", 0);
  return sc;
}

std::vector<qace::EvaluationInstance> LoadInstances(const std::string& path,
                                                    const std::string& schema) {
  if (schema == "instances") return ReadRecords<qace::EvaluationInstance>(path);
  if (schema == "pascal50s") return qace::PascalInstances(qace::LoadPascal50s(path));
  std::vector<qace::EvaluationInstance> out;
  for (auto& judged : qace::LoadRatedDataset(path, qace::ParseRatedSchema(schema))) {
    out.push_back(std::move(judged.instance));
  }
  return out;
}

int CmdScore(const RunConfig& config) {
  Engine engine(config);
  const auto mode = qace::ParseScoreMode(config.Get("mode", "ref"));
  const qace::Scorer scorer(*engine.gateway, ScorerConfigFrom(config, engine));
  const auto instances =
      LoadInstances(config.Require("input"), config.Get("input_schema", "instances"));
  {
    std::set<std::string> ids;
    for (const auto& i : instances) {
      if (!ids.insert(i.instance_id).second) {
        throw Error(ErrorKind::kConfigError, "duplicate instance_id " + i.instance_id);
      }
    }
  }

  const auto batch = scorer.ScoreBatch(instances, mode);

  std::string body;
  double sum = 0.0;
  std::size_t undefined = 0;
  for (const auto& instance : instances) {
    const auto it = batch.scores.find(instance.instance_id);
    if (it == batch.scores.end()) continue;
    body += qace::ToScoreLine(instance.instance_id, mode, it->second).dump() + "\n";
    if (it->second.defined) {
      sum += it->second.qace;
    } else {
      ++undefined;
    }
  }
  const std::string provenance =
      nlohmann::json{{"provenance", engine.Provenance(config)}}.dump() + "\n";
  WriteFile(config.Require("output"), provenance + body);

  if (undefined > 0) {
    spdlog::warn("{} instances had no questions; counted as 0.0 in the mean", undefined);
  }
  const std::size_t scored = batch.scores.size();
  std::cout << "scored: " << scored << "\n"
            << "failed: " << batch.failures.size() << "\n"
            << "undefined: " << undefined << "\n"
            << "mean_qace: " << (scored > 0 ? sum / static_cast<double>(scored) : 0.0)
            << "\n"
            << "backend_calls: " << engine.gateway->backend_calls() << "\n";
  for (const auto& [id, message] : batch.failures) {
    std::cout << "failure " << id << ": " << message << "\n";
  }
  return batch.failures.empty() ? kExitOk : kExitFailure;
}

int CmdMetaEval(const RunConfig& config) {
  const auto schema = config.Get("schema", "generic");
  const auto benchmark = config.Require("benchmark");
  nlohmann::json results = nlohmann::json::array();

  if (schema == "pascal50s") {
    const auto triplets = qace::LoadPascal50s(benchmark);
    const auto scores = qace::LoadScoreFile(config.Require("scores"));
    std::map<std::string, double> b, c;
    for (const auto& t : triplets) {
      for (auto side : {qace::HumanChoice::kB, qace::HumanChoice::kC}) {
        const auto it = scores.find(qace::PascalCandidateId(t.triplet_id, side));
        if (it != scores.end()) (side == qace::HumanChoice::kB ? b : c)[t.triplet_id] = it->second;
      }
    }
    const auto ties = config.Get("ties", "incorrect");
    if (ties != "incorrect" && ties != "half") {
      throw Error(ErrorKind::kConfigError, "ties must be incorrect or half");
    }
    results.push_back(qace::Pascal50sAccuracy(
        triplets, b, c, ties == "half" ? qace::TiePolicy::kHalf : qace::TiePolicy::kIncorrect));
  } else {
    const auto judged = qace::LoadRatedDataset(benchmark, qace::ParseRatedSchema(schema));
    const auto pairs = config.Has("scores")
                           ? qace::Align(judged, qace::LoadScoreFile(config.Get("scores")))
                           : qace::ToRatedPairs(judged);
    results.push_back(qace::KendallTau(pairs));
    if (config.GetBool("pearson", false)) {
      std::vector<double> m, h;
      for (const auto& p : pairs) m.push_back(p.metric_score), h.push_back(p.human_score);
      results.push_back(qace::PearsonCorrelation(m, h));
    }
  }

  const nlohmann::json doc = {{"dataset", benchmark},
                              {"schema", schema},
                              {"results", results},
                              {"provenance", {{"config", config.ToJson()}}}};
  if (config.Has("output")) WriteFile(config.Get("output"), doc.dump(2) + "\n");
  for (const auto& r : results) {
    std::cout << r.at("statistic_kind").get<std::string>() << ": "
              << r.at("value").get<double>() << " (n=" << r.at("n").get<std::size_t>();
    if (!r.at("p_value").is_null()) std::cout << ", p=" << r.at("p_value").get<double>();
    std::cout << ")\n";
  }
  return kExitOk;
}

int CmdBuildSynthetic(const RunConfig& config) {
  Engine engine(config);
  qace::SyntheticOptions options;
  options.unanswerable_ratio = config.GetDouble("ratio", 0.2);
  const auto base = config.Get("ratio_base", "final");
  if (base == "final") {
    options.ratio_base = qace::RatioBase::kFinal;
  } else if (base == "answerable") {
    options.ratio_base = qace::RatioBase::kAnswerable;
  } else {
    throw Error(ErrorKind::kConfigError, "ratio_base must be final or answerable");
  }
  options.seed = config.GetUnsigned("seed", 0);
  options.match = qace::MatchRule::Parse(config.Get("match", "exact"));
  options.lexicon = engine.lexicon_ptr();
  options.workers = config.GetUnsigned("workers", 4);

  const auto corpus = ReadRecords<qace::CaptionedImage>(config.Require("input"));
  const auto dataset = qace::AssembleDataset(corpus, *engine.gateway, options);

  const auto dump_lines = [](const std::vector<qace::SyntheticTriple>& triples) {
    std::string s;
    for (const auto& t : triples) s += nlohmann::json(t).dump() + "\n";
    return s;
  };
  WriteFile(config.Require("output"), dump_lines(dataset.triples));

  std::size_t unanswerable = 0;
  for (const auto& t : dataset.triples) unanswerable += t.answerable() ? 0 : 1;
  nlohmann::json report = dataset.report;
  report["answerable"] = dataset.triples.size() - unanswerable;
  report["unanswerable"] = unanswerable;
  report["total"] = dataset.triples.size();

  if (config.Has("split")) {
    const auto split =
        qace::Split(dataset.triples, config.GetDouble("split", 0.9), options.seed);
    WriteFile(config.Require("train_output"), dump_lines(split.train));
    WriteFile(config.Require("validation_output"), dump_lines(split.validation));
    report["train"] = split.train.size();
    report["validation"] = split.validation.size();
  }
  report["provenance"] = engine.Provenance(config);
  if (config.Has("report_output")) {
    WriteFile(config.Get("report_output"), report.dump(2) + "\n");
  }
  std::cout << "generated: " << dataset.report.generated << "\n"
            << "kept: " << dataset.report.kept << "\n"
            << "filtered: " << dataset.report.filtered << "\n"
            << "unanswerable: " << unanswerable << "\n"
            << "total: " << dataset.triples.size() << "\n";
  return kExitOk;
}

int CmdReport(const RunConfig& config, const std::vector<std::string>& score_files) {
  if (score_files.empty()) throw Error(ErrorKind::kConfigError, "--scores is required");
  const auto schema = config.Get("schema", "instances");
  const auto instances = LoadInstances(config.Require("instances"), schema);

  std::optional<qace::HumanRange> range;
  if (config.Has("human_range")) {
    const auto spec = config.Get("human_range");
    const auto colon = spec.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument(spec);
      range = qace::HumanRange{std::stod(spec.substr(0, colon)), std::stod(spec.substr(colon + 1))};
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfigError, "human_range must be <low>:<high>");
    }
    if (!(range->high > range->low)) {
      throw Error(ErrorKind::kConfigError, "human_range needs high > low");
    }
  } else if (schema == "composite" || schema == "flickr8k") {
    range = qace::DefaultHumanRange(qace::ParseRatedSchema(schema));
  }

  std::vector<qace::ScoreLine> lines;
  for (const auto& path : score_files) {
    auto more = qace::LoadScoreLines(path);
    lines.insert(lines.end(), more.begin(), more.end());
  }
  const auto records = qace::BuildCaseStudies(instances, lines, range);
  const auto markdown = qace::RenderMarkdown(
      records, nlohmann::json{{"config", config.ToJson()}, {"scores", score_files}});
  if (config.Has("output")) {
    WriteFile(config.Get("output"), markdown);
  } else {
    std::cout << markdown;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("qace"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"QACE caption evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  FlagSet flags;
  std::string config_path;
  std::string log_level = "warn";
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");
  flags.Add(&app, "--backend", "backend", "mock:<script.json> or exec:<command>");
  flags.Add(&app, "--backend-id", "backend_id", "backend id used in cache keys");
  flags.Add(&app, "--cache-dir", "cache_dir", "persistent response cache directory");
  flags.Add(&app, "--seed", "seed", "random seed");
  flags.Add(&app, "--lexicon", "lexicon", "word<TAB>TAG lexicon file");
  flags.Add(&app, "--max-in-flight", "max_in_flight", "concurrent backend requests");
  flags.Add(&app, "--workers", "workers", "worker threads");

  auto* score = app.add_subcommand("score", "score candidate captions");
  flags.Add(score, "--mode", "mode", "ref | img");
  flags.Add(score, "--input", "input", "instances file");
  flags.Add(score, "--input-schema", "input_schema",
            "instances | pascal50s | composite | flickr8k");
  flags.Add(score, "--output", "output", "score JSON-lines output");
  flags.Add(score, "--components", "similarity.components", "e.g. f1,embedding,answerability");
  flags.Add(score, "--clamp", "similarity.clamp", "clamp similarity to [0,1] (true|false)");
  flags.Add(score, "--answerability-side", "answerability.side", "context|candidate|min|mean");
  flags.Add(score, "--candidate-answer", "candidate_answer", "qa | span");
  flags.Add(score, "--answer-form", "answer_form", "span | head");
  flags.Add(score, "--spans", "spans.source", "builtin | backend");
  flags.Add(score, "--refs-per-instance", "refs_per_instance", "use the first k references");

  auto* meta = app.add_subcommand("meta-eval", "correlate scores with human judgments");
  flags.Add(meta, "--benchmark", "benchmark", "benchmark JSON-lines file");
  flags.Add(meta, "--schema", "schema", "composite | flickr8k | generic | pascal50s");
  flags.Add(meta, "--scores", "scores", "{instance_id, score} JSON-lines");
  flags.Add(meta, "--output", "output", "result JSON");
  flags.Add(meta, "--ties", "ties", "Pascal50s metric ties: incorrect | half");
  flags.Add(meta, "--pearson", "pearson", "also report Pearson (true|false)");

  auto* synth = app.add_subcommand("build-synthetic", "build synthetic VQA triples");
  flags.Add(synth, "--input", "input", "corpus JSON-lines {image_id, captions}");
  flags.Add(synth, "--output", "output", "triples JSON-lines");
  flags.Add(synth, "--report", "report_output", "round-trip report JSON");
  flags.Add(synth, "--ratio", "ratio", "unanswerable ratio");
  flags.Add(synth, "--ratio-base", "ratio_base", "final | answerable");
  flags.Add(synth, "--match", "match", "exact | f1:<threshold>");
  flags.Add(synth, "--split", "split", "train fraction, e.g. 0.9");
  flags.Add(synth, "--train-output", "train_output", "train split JSON-lines");
  flags.Add(synth, "--validation-output", "validation_output", "validation split JSON-lines");

  auto* report = app.add_subcommand("report", "render a case-study report");
  std::vector<std::string> score_files;
  report->add_option("--scores", score_files, "score files (repeatable)");
  flags.Add(report, "--instances", "instances", "instances file");
  flags.Add(report, "--schema", "schema", "instances | composite | flickr8k | pascal50s");
  flags.Add(report, "--human-range", "human_range", "<low>:<high> judgment scale");
  flags.Add(report, "--output", "output", "markdown output (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    RunConfig config = config_path.empty() ? RunConfig() : RunConfig::Load(config_path);
    flags.ApplyTo(config);
    if (*score) return CmdScore(config);
    if (*meta) return CmdMetaEval(config);
    if (*synth) return CmdBuildSynthetic(config);
    if (*report) return CmdReport(config, score_files);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kConfigError:
      case ErrorKind::kNegativeSamplingImpossible:
        return kExitConfig;
      default:
        return kExitFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}
