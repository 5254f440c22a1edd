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

#include <random>

#include "qace/span_extract.hpp"
#include "qace/utf8.hpp"
#include "test_support.hpp"

namespace qace {
namespace {

std::vector<std::string> Texts(const std::vector<AnswerSpan>& spans) {
  std::vector<std::string> out;
  for (const auto& s : spans) out.push_back(s.text);
  return out;
}

TEST(SpanExtract, SimpleNounPhrase) {
  const auto spans = ExtractAnswerSpans("a man");
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0].text, "a man");
  EXPECT_EQ(spans[0].head_noun, "man");
  EXPECT_EQ(spans[0].char_start, 0u);
  EXPECT_EQ(spans[0].char_end, 5u);
}

TEST(SpanExtract, NoNounGivesNoSpans) {
  EXPECT_TRUE(ExtractAnswerSpans("runs quickly").empty());
}

TEST(SpanExtract, AdjectiveInsidePhrase) {
  EXPECT_EQ(Texts(ExtractAnswerSpans("a brown dog chases the ball")),
            (std::vector<std::string>{"a brown dog", "the ball"}));
}

TEST(SpanExtract, SurfingCaption) {
  const auto spans = ExtractAnswerSpans("a man riding a wave on top of a surfboard");
  std::vector<std::string> heads;
  for (const auto& s : spans) heads.push_back(s.head_noun);
  EXPECT_EQ(heads, (std::vector<std::string>{"man", "wave", "top", "surfboard"}));
}

TEST(SpanExtract, NounVerbAfterSubjectIsVerb) {
  EXPECT_EQ(Texts(ExtractAnswerSpans("two children play in the sand")),
            (std::vector<std::string>{"children", "the sand"}));
}

TEST(SpanExtract, EmptyCaptionThrows) {
  for (const char* caption : {"", "   ", "\t\n"}) {
    try {
      ExtractAnswerSpans(caption);
      FAIL() << "expected EmptyCaption for '" << caption << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kEmptyCaption);
    }
  }
}

TEST(SpanExtract, PunctuationIsPeeled) {
  const auto spans = ExtractAnswerSpans("A man, holding (a kite).");
  EXPECT_EQ(Texts(spans), (std::vector<std::string>{"A man", "a kite"}));
  EXPECT_EQ(spans[1].char_start, 16u);
}

TEST(SpanExtract, DuplicatesDroppedCaseInsensitively) {
  const auto spans = ExtractAnswerSpans("The dog and the dog near a cat");
  EXPECT_EQ(Texts(spans), (std::vector<std::string>{"The dog", "a cat"}));
  EXPECT_EQ(spans[1].index, 1u);
}

TEST(SpanExtract, OffsetsAreCodePoints) {
  const std::string caption = "a caf\xC3\xA9 near the b\xC3\xBCro";
  const auto spans = ExtractAnswerSpans(caption);
  ASSERT_EQ(spans.size(), 2u);
  const auto text = utf8::Decode(caption);
  for (const auto& s : spans) {
    EXPECT_EQ(utf8::Encode(std::u32string_view(text).substr(s.char_start,
                                                             s.char_end - s.char_start)),
              s.text);
  }
  EXPECT_EQ(spans[1].char_end, text.size());
}

TEST(SpanExtract, InvalidUtf8DoesNotThrow) {
  const std::string caption = "a dog \xFF\xFE near a cat";
  EXPECT_NO_THROW(ExtractAnswerSpans(caption));
}

TEST(SpanExtract, HeadForm) {
  const auto span = ExtractAnswerSpans("a big red bus")[0];
  const auto head = AsHeadSpan(span);
  EXPECT_EQ(head.text, "bus");
  EXPECT_EQ(head.char_start, 10u);
  EXPECT_EQ(head.char_end, 13u);
}

TEST(SpanExtract, SuffixRules) {
  const auto tags = TagTokens("the dogs were running happily with a colorful kite");
  std::vector<PosTag> got;
  for (const auto& t : tags) got.push_back(t.tag);
  EXPECT_EQ(got[1], PosTag::kNoun);  // dogs
  EXPECT_EQ(got[3], PosTag::kVerb);  // running
  EXPECT_EQ(got[4], PosTag::kAdv);   // happily
  EXPECT_EQ(got[7], PosTag::kAdj);   // colorful
}

TEST(SpanExtract, CustomLexiconChangesTags) {
  auto lexicon = Lexicon::Parse("a\tDET\nblorp\tVERB\n", "inline");
  EXPECT_TRUE(ExtractAnswerSpans("blorp", lexicon).empty());
  EXPECT_EQ(Texts(ExtractAnswerSpans("a blorp", Lexicon::Default())),
            (std::vector<std::string>{"a blorp"}));
}

TEST(Lexicon, BundledFileParses) {
  const auto lexicon = Lexicon::Load(std::string(QACE_DATA_DIR) + "/lexicon.tsv");
  EXPECT_GT(lexicon.size(), 400u);
  EXPECT_EQ(lexicon.size(), Lexicon::Default().size());
  EXPECT_EQ(lexicon.Lookup("the"), PosTag::kDet);
  EXPECT_FALSE(lexicon.Lookup("man").has_value());
}

TEST(Lexicon, BadLineReportsLineNumber) {
  try {
    Lexicon::Parse("a\tDET\n# comment\nbroken line\n", "test");
    FAIL();
  } catch (const SchemaViolation& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(Lexicon::Parse("dog\tANIMAL\n"), SchemaViolation);
}

// Random captions over a small vocabulary: spans are ordered, disjoint,
// match the caption text and end on a noun.
TEST(SpanExtract, RandomCaptionInvariants) {
  const std::vector<std::string> vocab = {
      "a", "the", "red", "big", "dog", "man", "runs", "on", "table", "quickly",
      "two", "cats", ",", "near", "sitting", "wooden", "bench", "."};
  std::mt19937 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::string caption;
    const int n = 1 + static_cast<int>(gen() % 12);
    for (int k = 0; k < n; ++k) {
      caption += (k ? " " : "") + vocab[gen() % vocab.size()];
    }
    const auto tokens = TagTokens(caption);
    const auto spans = ExtractNounPhrases(caption, tokens);
    const auto text = utf8::Decode(caption);
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const auto& s = spans[i];
      EXPECT_EQ(s.index, i);
      EXPECT_LE(prev_end, s.char_start) << caption;
      EXPECT_LT(s.char_start, s.char_end);
      EXPECT_EQ(utf8::Encode(std::u32string_view(text).substr(
                    s.char_start, s.char_end - s.char_start)),
                s.text);
      const auto last = std::find_if(tokens.begin(), tokens.end(), [&](const PosToken& t) {
        return t.char_end == s.char_end;
      });
      ASSERT_NE(last, tokens.end());
      EXPECT_EQ(last->tag, PosTag::kNoun) << caption;
      prev_end = s.char_end;
    }
  }
}

TEST(SpanExtract, JsonRoundTrip) {
  const auto span = ExtractAnswerSpans("a brown dog")[0];
  const nlohmann::json j = span;
  EXPECT_EQ(j.get<AnswerSpan>(), span);
}

}  // namespace
}  // namespace qace
