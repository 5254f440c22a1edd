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

#include "qace/meta_eval.hpp"
#include "test_support.hpp"

namespace qace {
namespace {

using qace::testing::Fixture;
using qace::testing::TempDir;
using qace::testing::WriteFile;

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kConfigError;
}

TEST(RatedDataset, Composite) {
  const auto judged = LoadRatedDataset(Fixture("rated/composite.jsonl"), RatedSchema::kComposite);
  ASSERT_EQ(judged.size(), 10u);
  EXPECT_EQ(judged[0].instance.instance_id, "i01");
  EXPECT_EQ(judged[0].human_score, 4.5);
  EXPECT_EQ(judged[0].instance.human_score, 4.5);
  EXPECT_EQ(judged[9].instance.references.size(), 2u);
}

TEST(RatedDataset, Flickr8kAveragesJudgments) {
  const auto judged = LoadRatedDataset(Fixture("rated/flickr8k.jsonl"), RatedSchema::kFlickr8k);
  ASSERT_EQ(judged.size(), 10u);
  EXPECT_NEAR(judged[0].human_score, 11.0 / 3.0, 1e-15);
  EXPECT_NEAR(DefaultHumanRange(RatedSchema::kFlickr8k)->Normalize(judged[7].human_score), 1.0,
              1e-15);
}

TEST(RatedDataset, GenericKendall) {
  const auto judged = LoadRatedDataset(Fixture("rated/generic.jsonl"), RatedSchema::kGeneric);
  const auto result = KendallTau(ToRatedPairs(judged));
  EXPECT_EQ(result.statistic_kind, StatisticKind::kKendallTauB);
  EXPECT_NEAR(result.value, 0.8467803948114512, 1e-15);
  EXPECT_EQ(result.n, 8u);
  ASSERT_TRUE(result.p_value.has_value());
  const auto t = stats::CorrelationTTest(result.value, 8);
  EXPECT_EQ(*result.p_value, t.p);
}

TEST(RatedDataset, Errors) {
  TempDir dir;
  WriteFile(dir.path() / "a.jsonl", "{\"instance_id\": \"x\", \"candidate\": \"c\"}\n");
  try {
    LoadRatedDataset(dir / "a.jsonl", RatedSchema::kComposite);
    FAIL();
  } catch (const SchemaViolation& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  WriteFile(dir.path() / "b.jsonl",
            "{\"instance_id\": \"x\", \"metric_score\": 1, \"human_score\": 2}\n\n"
            "{\"instance_id\": \"y\", \"metric_score\": 1, \"human_score\": \"high\"}\n");
  EXPECT_EQ(KindOf([&] { LoadRatedDataset(dir / "b.jsonl", RatedSchema::kGeneric); }),
            ErrorKind::kRecordError);
  WriteFile(dir.path() / "c.jsonl", "{\"instance_id\": \"x\"\n");
  try {
    LoadRatedDataset(dir / "c.jsonl", RatedSchema::kGeneric);
    FAIL();
  } catch (const SchemaViolation& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(ParseRatedSchema("coco"), Error);
}

TEST(Align, ReportsMissingAndExtraIds) {
  const auto judged = LoadRatedDataset(Fixture("rated/generic.jsonl"), RatedSchema::kGeneric);
  std::map<std::string, double> scores;
  for (const auto& j : judged) scores[j.instance.instance_id] = *j.metric_score;
  EXPECT_EQ(Align(judged, scores).size(), judged.size());
  scores.erase("g3");
  scores["zz"] = 0.5;
  try {
    Align(judged, scores);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAlignmentError);
    EXPECT_NE(std::string(e.what()).find("g3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
  }
}

TEST(ScoreFile, NullCountsAsZeroAndProvenanceSkipped) {
  TempDir dir;
  WriteFile(dir.path() / "s.jsonl",
            "{\"provenance\": {\"x\": 1}}\n"
            "{\"instance_id\": \"a\", \"score\": 0.25}\n"
            "{\"instance_id\": 3, \"score\": null}\n");
  const auto scores = LoadScoreFile(dir / "s.jsonl");
  EXPECT_EQ(scores.at("a"), 0.25);
  EXPECT_EQ(scores.at("3"), 0.0);
}

class PascalTest : public ::testing::Test {
 protected:
  std::vector<Pascal50sTriplet> triplets_ = LoadPascal50s(Fixture("pascal50s/triplets.jsonl"));
};

TEST_F(PascalTest, Loads) {
  ASSERT_EQ(triplets_.size(), 8u);
  EXPECT_EQ(triplets_[1].human_choice, HumanChoice::kC);
  const auto instances = PascalInstances(triplets_);
  ASSERT_EQ(instances.size(), 16u);
  EXPECT_EQ(instances[0].instance_id, "t1/B");
  EXPECT_EQ(instances[1].instance_id, "t1/C");
  EXPECT_EQ(instances[1].candidate, "a picture");
}

TEST_F(PascalTest, AccuracyAndTies) {
  std::map<std::string, double> b, c;
  for (const auto& t : triplets_) {
    b[t.triplet_id] = t.human_choice == HumanChoice::kB ? 0.9 : 0.1;
    c[t.triplet_id] = t.human_choice == HumanChoice::kC ? 0.9 : 0.1;
  }
  EXPECT_EQ(Pascal50sAccuracy(triplets_, b, c).value, 1.0);
  EXPECT_EQ(Pascal50sAccuracy(triplets_, c, b).value, 0.0);
  EXPECT_EQ(Pascal50sAccuracy(triplets_, b, b).value, 0.0);
  EXPECT_EQ(Pascal50sAccuracy(triplets_, b, b, TiePolicy::kHalf).value, 0.5);
  b.erase("t4");
  EXPECT_EQ(KindOf([&] { Pascal50sAccuracy(triplets_, b, c); }), ErrorKind::kRecordError);
}

TEST(CorrelationResult, JsonWritesInfiniteT) {
  const std::vector<double> x = {1, 2, 3, 4};
  const nlohmann::json j = KendallTau(x, x);
  EXPECT_EQ(j.at("statistic_kind"), "kendall_tau_b");
  EXPECT_EQ(j.at("t_statistic"), "inf");
  EXPECT_EQ(j.at("p_value"), 0.0);
  EXPECT_EQ(j.at("p_exact"), true);
  const std::vector<double> two = {1, 2};
  const nlohmann::json small = KendallTau(two, two);
  EXPECT_TRUE(small.at("p_value").is_null());
}

}  // namespace
}  // namespace qace
