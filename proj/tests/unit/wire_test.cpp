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

// Golden files under fixtures/wire are shared with backend implementations.

#include <gtest/gtest.h>

#include "qace/backend.hpp"
#include "qace/gateway.hpp"
#include "test_support.hpp"

namespace qace {
namespace {

using qace::testing::Fixture;
using qace::testing::ReadFile;
using qace::testing::TempDir;

nlohmann::json Exchanges() {
  return nlohmann::json::parse(ReadFile(Fixture("wire/exchanges.json")));
}

// Issues the golden exchanges in file order through the public gateway API.
void IssueExchanges(Gateway& gateway) {
  const auto spans = gateway.ExtractSpans("a dog on the grass");
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans, ExtractAnswerSpans("a dog on the grass"));

  const auto set = gateway.GenerateQuestions("c1", "a dog on the grass", spans);
  EXPECT_EQ(set.questions[0].question, "What is on the grass?");
  EXPECT_EQ(set.questions[1].source_span.text, "the grass");

  const auto text = gateway.AnswerText("What is on the grass?", "a dog on the grass");
  EXPECT_EQ(text.answer_text, "a dog");
  EXPECT_DOUBLE_EQ(text.p_unanswerable, 0.02);

  const auto visual = gateway.AnswerVisual("What animal is on the grass?", "img-0001");
  EXPECT_EQ(visual.answer_text, "dog");
  EXPECT_EQ(visual.context_kind, ContextKind::kImage);

  const auto unanswerable = gateway.AnswerVisual("What is the man riding?", "img-0001");
  EXPECT_EQ(unanswerable.answer_text, kUnanswerable);
  EXPECT_DOUBLE_EQ(unanswerable.p_unanswerable, 0.9);

  EXPECT_DOUBLE_EQ(gateway.Similarity("dog", "dog"), 1.0);
}

class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(inner) {}
  std::string id() const override { return inner_.id(); }
  nlohmann::json Call(Capability c, const nlohmann::json& request) override {
    seen_.push_back({{"capability", CapabilityName(c)}, {"request", request}});
    return inner_.Call(c, request);
  }
  const std::vector<nlohmann::json>& seen() const { return seen_; }

 private:
  Backend& inner_;
  std::vector<nlohmann::json> seen_;
};

TEST(WireGolden, RequestBodiesMatchExchanges) {
  const auto golden = Exchanges();
  MockBackend mock(MockScript::FromJson(golden));
  RecordingBackend recorder(mock);
  Gateway gateway(recorder);
  IssueExchanges(gateway);

  const auto& entries = golden.at("entries");
  ASSERT_EQ(recorder.seen().size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    EXPECT_EQ(recorder.seen()[i].at("capability"), entries[i].at("capability"));
    EXPECT_EQ(recorder.seen()[i].at("request").dump(), entries[i].at("request").dump());
  }
}

TEST(WireGolden, StreamBytesMatchRecordedRequests) {
  TempDir dir;
  const std::string sent = dir / "sent.jsonl";
  {
    StreamBackend backend("tee " + sent + " | " + std::string(QACE_MOCK_SERVER) + " " +
                              Fixture("wire/exchanges.json"),
                          "wire-golden");
    Gateway gateway(backend);
    IssueExchanges(gateway);
  }  // Waits for the child pipeline to exit.
  EXPECT_EQ(ReadFile(sent), ReadFile(Fixture("wire/requests.jsonl")));
}

TEST(WireGolden, NonConformingResponsesAreViolations) {
  const auto violations =
      nlohmann::json::parse(ReadFile(Fixture("wire/violations.json")));
  ASSERT_FALSE(violations.empty());
  const std::vector<AnswerSpan> spans = ExtractAnswerSpans("a dog on the grass");
  for (const auto& v : violations) {
    const auto cap = *ParseCapability(v.at("capability").get<std::string>());
    MockScript script;
    script.AddResponse(cap, nlohmann::json::object(), v.at("response"));
    MockBackend mock(std::move(script));
    Gateway gateway(mock);
    try {
      switch (cap) {
        case Capability::kGenerateQuestions:
          gateway.GenerateQuestions("c1", "a dog on the grass", spans);
          break;
        case Capability::kAnswerText:
          gateway.AnswerText("q?", "ctx");
          break;
        case Capability::kAnswerVisual:
          gateway.AnswerVisual("q?", "img-0001");
          break;
        case Capability::kSimilarity:
          gateway.Similarity("a", "b");
          break;
        case Capability::kExtractSpans:
          gateway.ExtractSpans("a dog on the grass");
          break;
      }
      ADD_FAILURE() << "accepted " << v.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kProtocolViolation) << v.dump();
    }
  }
}

}  // namespace
}  // namespace qace
