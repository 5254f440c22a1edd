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


#include <gtest/gtest.h>

#include "qace/answer_sim.hpp"
#include "qace/backend.hpp"

namespace qace {
namespace {

TEST(Normalize, SquadSteps) {
  EXPECT_EQ(NormalizeAnswer("The Brown-Dog, an animal!").tokens,
            (std::vector<std::string>{"browndog", "animal"}));
  EXPECT_TRUE(NormalizeAnswer("a an the").tokens.empty());
  EXPECT_EQ(NormalizeAnswer("Theatre").tokens, (std::vector<std::string>{"theatre"}));
}

TEST(TokenF1, Examples) {
  EXPECT_NEAR(TokenF1("brown dog", "dog"), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(TokenF1("the dog", "a dog"), 1.0);
  EXPECT_EQ(TokenF1("", ""), 1.0);
  EXPECT_EQ(TokenF1("the", "dog"), 0.0);
  EXPECT_EQ(TokenF1("cat", "dog"), 0.0);
  EXPECT_NEAR(TokenF1("dog dog cat", "dog cat cat"), 2.0 / 3.0, 1e-15);
}

TEST(Compose, SandBeach) {
  MockScript script;
  script.AddResponse(Capability::kSimilarity, {{"a", "sand"}, {"b", "beach"}},
                     {{"score", 0.6}});
  MockBackend backend(script);
  Gateway gateway(backend);
  const AnswerRecord cand{"sand", 0.0, ContextKind::kCandidate, "m"};
  const AnswerRecord ctx{"beach", 0.0, ContextKind::kReference, "m"};
  const auto b = Compose(cand, ctx, {}, &gateway);
  EXPECT_EQ(*b.f1, 0.0);
  EXPECT_EQ(*b.embedding, 0.6);
  EXPECT_EQ(*b.answerability, 1.0);
  EXPECT_NEAR(b.mean, 1.6 / 3.0, 1e-15);
}

TEST(Compose, EmptyAnswersSkipBackend) {
  MockBackend backend(MockScript{});
  Gateway gateway(backend);
  const AnswerRecord empty{"", 0.2, ContextKind::kCandidate, "m"};
  const AnswerRecord full{"dog", 0.4, ContextKind::kImage, "m"};
  EXPECT_EQ(*Compose(empty, empty, {}, &gateway).embedding, 1.0);
  EXPECT_EQ(*Compose(empty, full, {}, &gateway).embedding, 0.0);
  EXPECT_EQ(backend.total_calls(), 0u);
}

TEST(Compose, AnswerabilitySides) {
  const AnswerRecord cand{"x", 0.2, ContextKind::kCandidate, "m"};
  const AnswerRecord ctx{"y", 0.6, ContextKind::kReference, "m"};
  SimilarityConfig config = SimilarityConfig::WithComponents("answerability");
  const std::pair<AnswerabilitySide, double> cases[] = {
      {AnswerabilitySide::kContext, 0.4},
      {AnswerabilitySide::kCandidate, 0.8},
      {AnswerabilitySide::kMin, 0.4},
      {AnswerabilitySide::kMean, 0.6}};
  for (const auto& [side, want] : cases) {
    config.answerability_side = side;
    const auto b = Compose(cand, ctx, config, nullptr);
    EXPECT_NEAR(*b.answerability, want, 1e-15);
    EXPECT_FALSE(b.f1.has_value());
    EXPECT_NEAR(b.mean, want, 1e-15);
  }
}

TEST(Compose, EmbeddingWithoutBackend) {
  const AnswerRecord a{"x", 0.0, ContextKind::kCandidate, "m"};
  try {
    Compose(a, a, {}, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kComponentUnavailable);
  }
}

TEST(SimilarityConfig, Components) {
  const auto c = SimilarityConfig::WithComponents("[f1, answerability]");
  EXPECT_TRUE(c.f1);
  EXPECT_FALSE(c.embedding);
  EXPECT_TRUE(c.answerability);
  EXPECT_THROW(SimilarityConfig::WithComponents("bleu"), Error);
  EXPECT_THROW(SimilarityConfig::WithComponents(""), Error);
  EXPECT_THROW(ParseAnswerabilitySide("left"), Error);
}

TEST(SimilarityBreakdown, JsonRoundTrip) {
  SimilarityBreakdown b{0.5, std::nullopt, 0.25, 0.375};
  const nlohmann::json j = b;
  EXPECT_TRUE(j.at("embedding").is_null());
  EXPECT_EQ(j.get<SimilarityBreakdown>(), b);
}

}  // namespace
}  // namespace qace
