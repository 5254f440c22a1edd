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

// Shared helpers for the unit and acceptance suites.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qace/qace.hpp"

namespace qace::testing {

inline std::string Fixture(const std::string& relative) {
  return std::string(QACE_FIXTURES_DIR) + "/" + relative;
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("qace_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::vector<EvaluationInstance> LoadOracleInstances() {
  std::vector<EvaluationInstance> out;
  ReadJsonLines(Fixture("oracle/instances.jsonl"), [&](const nlohmann::json& r, std::size_t) {
    out.push_back(r.get<EvaluationInstance>());
  });
  return out;
}

inline nlohmann::json LoadOracleExpected() {
  return nlohmann::json::parse(ReadFile(Fixture("oracle/expected.json")));
}

// Fails the run when a textual-QA call carries anything but the candidate as
// context. Wraps another backend.
class TripwireBackend : public Backend {
 public:
  TripwireBackend(Backend& inner, std::vector<std::string> candidates)
      : inner_(inner), candidates_(std::move(candidates)) {}

  std::string id() const override { return inner_.id(); }

  nlohmann::json Call(Capability capability, const nlohmann::json& request) override {
    if (capability == Capability::kAnswerText) {
      const auto context = request.at("context").get<std::string>();
      if (std::find(candidates_.begin(), candidates_.end(), context) == candidates_.end()) {
        fired_.fetch_add(1);
        throw Error(ErrorKind::kProtocolViolation, "tripwire: context '" + context + "'");
      }
    }
    return inner_.Call(capability, request);
  }

  std::size_t fired() const { return fired_.load(); }

 private:
  Backend& inner_;
  std::vector<std::string> candidates_;
  std::atomic<std::size_t> fired_{0};
};

// Synthetic corpus with three noun phrases per caption. The mock answers the
// first two questions of every caption with the span and the third with a
// wrong answer, so a third of the pairs fail the round trip.
struct SyntheticFixture {
  std::vector<CaptionedImage> corpus;
  nlohmann::json script;
};

inline SyntheticFixture MakeSyntheticFixture(std::size_t images,
                                             std::size_t captions_per_image) {
  SyntheticFixture f;
  f.script = {{"backend_id", "mock-synthetic"}, {"entries", nlohmann::json::array()}};
  auto& entries = f.script["entries"];
  for (std::size_t i = 0; i < images; ++i) {
    CaptionedImage image{"img" + std::to_string(i), {}};
    for (std::size_t c = 0; c < captions_per_image; ++c) {
      const std::string tag = std::to_string(i) + "c" + std::to_string(c);
      const std::vector<std::string> spans = {"a xa" + tag, "the yb" + tag, "a zc" + tag};
      const std::string caption =
          spans[0] + " near " + spans[1] + " with " + spans[2];
      image.captions.push_back(caption);
      nlohmann::json questions = nlohmann::json::array();
      for (std::size_t s = 0; s < spans.size(); ++s) {
        const std::string q = "question " + std::to_string(s) + " about " + tag + "?";
        questions.push_back({{"question", q}, {"span_index", s}});
        const std::string answer = s < 2 ? spans[s] : "something else";
        entries.push_back({{"capability", "answer_text"},
                           {"request", {{"question", q}, {"context", caption}}},
                           {"response", {{"answer", answer}, {"p_unanswerable", 0.0}}}});
      }
      entries.push_back({{"capability", "generate_questions"},
                         {"request", {{"caption", caption}}},
                         {"response", {{"questions", questions}}}});
    }
    f.corpus.push_back(std::move(image));
  }
  return f;
}

}  // namespace qace::testing
