// Copyright 2026 The Attrguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <string>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/model/simulated.h"
#include "attrguard/trace/chain.h"
#include "attrguard/trace/loop.h"
#include "attrguard/trace/vocabulary.h"
#include "attrguard/trace/words.h"
#include "attrguard/util/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace attrguard {
namespace {

using ::attrguard::test::Comments;
using ::attrguard::test::ExpectErrorCode;

std::vector<std::string> Texts(const std::vector<Word>& words) {
  std::vector<std::string> out;
  for (const auto& w : words) out.push_back(w.text);
  return out;
}

TEST(WordsTest, Segmentation) {
  EXPECT_EQ(Texts(SegmentWords("don't stop-me, now! -x- 'q'")),
            (std::vector<std::string>{"don't", "stop-me", "now", "x", "q"}));
  EXPECT_EQ(Texts(SegmentWords("Zürich\xE2\x80\x94" "Genève")),
            (std::vector<std::string>{"Zürich", "Genève"}));
  EXPECT_TRUE(SegmentWords(" ... ").empty());
}

TEST(WordsTest, SplitTokensShareTheirWeight) {
  std::string text = "ab cd, ef";
  TokenizedText t;
  // "ab c" spans two words; "," touches none; "d" and "ef" one each.
  t.ids = {1, 2, 3, 4};
  t.spans = {{0, 4}, {4, 5}, {5, 6}, {7, 9}};
  t.pieces = {"ab c", "d", ",", "ef"};
  AttentionResponse a{{0.4, 0.1, 0.2, 0.3}};
  WordAggregation agg = AggregateWordScores(t, a, text);
  ASSERT_EQ(agg.words.size(), 3u);
  EXPECT_DOUBLE_EQ(agg.words[0].score, 0.2);
  EXPECT_DOUBLE_EQ(agg.words[1].score, 0.3);
  EXPECT_DOUBLE_EQ(agg.words[2].score, 0.3);
  EXPECT_DOUBLE_EQ(agg.residue, 0.2);
  EXPECT_EQ(agg.split_tokens, 1u);
}

TEST(WordsTest, ScoresAddUpToTokenTotal) {
  Rng rng(11);
  const std::vector<std::string> pieces = {"a", "bb", ",", "c-d", "é", "!", "xyz"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string text;
    size_t n = 1 + rng.UniformIndex(12);
    for (size_t i = 0; i < n; ++i) {
      if (i > 0 && rng.UniformIndex(2) == 0) text += " ";
      text += pieces[rng.UniformIndex(pieces.size())];
    }
    // Random contiguous token boundaries over the bytes.
    TokenizedText t;
    AttentionResponse a;
    size_t pos = 0;
    double total = 0;
    while (pos < text.size()) {
      size_t len = 1 + rng.UniformIndex(4);
      size_t end = std::min(text.size(), pos + len);
      t.ids.push_back(static_cast<int64_t>(t.ids.size()));
      t.spans.push_back({pos, end});
      t.pieces.push_back(text.substr(pos, end - pos));
      double w = static_cast<double>(1 + rng.UniformIndex(100));
      a.weights.push_back(w);
      total += w;
      pos = end;
    }
    WordAggregation agg = AggregateWordScores(t, a, text);
    double sum = agg.residue;
    for (const auto& w : agg.words) sum += w.score;
    EXPECT_NEAR(sum, total, 1e-9) << text;
  }
}

TEST(WordsTest, MisalignedAttentionIsAnError) {
  TokenizedText t;
  t.ids = {1};
  t.spans = {{0, 1}};
  t.pieces = {"a"};
  ExpectErrorCode(ErrorCode::kAlignmentMismatch, [&] {
    AggregateWordScores(t, AttentionResponse{{0.5, 0.5}}, "a");
  });
  t.spans = {{0, 9}};
  ExpectErrorCode(ErrorCode::kAlignmentMismatch, [&] {
    AggregateWordScores(t, AttentionResponse{{1.0}}, "a");
  });
}

TEST(RankWordsTest, TiesBreakByPositionAndDuplicatesKeepBest) {
  std::vector<WordScore> w = {
      {"b", 10, 11, 0.5}, {"a", 0, 1, 0.5}, {"c", 20, 21, 0.9},
      {"a", 30, 31, 0.7}, {"d", 5, 6, 0.1},
  };
  auto r = RankWords(w, 3);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], (VocabularyEntry{"c", 0.9, 20}));
  EXPECT_EQ(r[1], (VocabularyEntry{"a", 0.7, 30}));
  EXPECT_EQ(r[2], (VocabularyEntry{"b", 0.5, 10}));
  EXPECT_EQ(RankWords(w, 100).size(), 4u);
}

TEST(RankWordsTest, SmallerKIsAPrefix) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<WordScore> w;
    size_t n = rng.UniformIndex(20);
    for (size_t i = 0; i < n; ++i) {
      w.push_back({std::string(1, static_cast<char>('a' + rng.UniformIndex(8))),
                   i * 3, i * 3 + 1, static_cast<double>(rng.UniformIndex(5))});
    }
    auto big = RankWords(w, 10);
    for (size_t k = 1; k <= 10; ++k) {
      auto small = RankWords(w, k);
      ASSERT_LE(small.size(), big.size());
      EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin()));
    }
  }
}

TEST(VocabularyTest, SurrogateAttentionFindsKeywords) {
  SimulatedProvider model;
  auto taxonomy = DefaultTaxonomy();
  VocabularyOptions o;
  o.k = 2;
  PrivacyVocabulary v = ExtractPrivacyVocabulary(
      "my hubby is a nurse", RequireAttribute(taxonomy, "gender"), model, o);
  EXPECT_EQ(v.Words(), (std::vector<std::string>{"hubby", "nurse"}));
  o.k = 10;
  v = ExtractPrivacyVocabulary("my hubby is a nurse",
                               RequireAttribute(taxonomy, "gender"), model, o);
  // Stopwords and the query words are gone.
  EXPECT_EQ(v.Words(), (std::vector<std::string>{"hubby", "nurse"}));
  o.stopword_filter = false;
  v = ExtractPrivacyVocabulary("my hubby is a nurse",
                               RequireAttribute(taxonomy, "gender"), model, o);
  EXPECT_EQ(v.entries.size(), 5u);
  EXPECT_EQ(nlohmann::json(v).get<PrivacyVocabulary>(), v);
}

TEST(ChainTest, ParsesStepsAndVerifiesQuotes) {
  InferenceChain c = ParseInferenceChain(
      "Inference Chain:\nStep 1: The author has a husband.\nEvidence: "
      "“my hubby” is quoted.\nstep 2 : Something else.\nEvidence: "
      "\"not there\"\nStep 3: No evidence line.",
      "yesterday my hubby said");
  ASSERT_EQ(c.steps.size(), 3u);
  EXPECT_EQ(c.steps[0].claim, "The author has a husband.");
  EXPECT_EQ(c.steps[0].quote, "my hubby");
  EXPECT_TRUE(c.steps[0].quote_verified);
  EXPECT_FALSE(c.steps[1].quote_verified);
  EXPECT_TRUE(c.steps[2].evidence.empty());
  EXPECT_EQ(c.QuoteViolations(), 1u);
  EXPECT_EQ(nlohmann::json(c).get<InferenceChain>(), c);
}

TEST(ChainTest, SurrogateChainCitesTheText) {
  SimulatedProvider model;
  auto taxonomy = DefaultTaxonomy();
  const auto& gender = RequireAttribute(taxonomy, "gender");
  Prediction p = ParsePrediction("Inference: x\nGuess: Female", "gender");
  InferenceChain c =
      GenerateInferenceChain("my hubby, bless him", gender, p, model);
  ASSERT_EQ(c.steps.size(), 1u);
  EXPECT_EQ(c.steps[0].quote, "hubby");
  EXPECT_EQ(c.QuoteViolations(), 0u);
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] {
    GenerateInferenceChain("x", gender, Prediction{}, model);
  });
}

TEST(AnonymizerTest, SeparatorHandling) {
  AnonymizationResult r = SplitAnonymizerResponse("I changed x.\n # \nnew\ntext\n");
  EXPECT_EQ(r.text, "new\ntext");
  EXPECT_FALSE(r.separator_missing);
  r = SplitAnonymizerResponse(" only text ");
  EXPECT_EQ(r.text, "only text");
  EXPECT_TRUE(r.separator_missing);
}

SimulatedModelConfig WithKeywords(std::vector<KeywordEntry> keywords) {
  SimulatedModelConfig c = DefaultSimulatedConfig();
  c.keywords = std::move(keywords);
  return c;
}

AnonymizationTrail Trace(const std::string& text, const Provider& model,
                         int max_iterations = 5) {
  auto taxonomy = DefaultTaxonomy();
  TraceLoopConfig config;
  config.max_iterations = max_iterations;
  return RunTraceLoop(Comments({text}), RequireAttribute(taxonomy, "gender"),
                      model, model, model, config);
}

TEST(TraceLoopTest, StopsWhenConfidenceDrops) {
  SimulatedProvider model;
  AnonymizationTrail t = Trace("me and my bloke friends", model);
  EXPECT_EQ(t.stop_reason, StopReason::kConfidenceBelowThreshold);
  ASSERT_EQ(t.iterations.size(), 2u);
  EXPECT_EQ(t.iterations[0].confidence, 5);
  EXPECT_EQ(t.iterations[0].vocabulary.Words().front(), "bloke");
  EXPECT_EQ(t.iterations[0].anonymized_text, "me and my person friends");
  EXPECT_EQ(t.iterations[1].confidence, 1);
  EXPECT_TRUE(t.iterations[1].anonymized_text.empty());
  EXPECT_EQ(t.final_text, "me and my person friends");
}

TEST(TraceLoopTest, StopsWhenTextIsUnchanged) {
  SimulatedProvider model(
      WithKeywords({{"bloke", "gender", "Male", 0.9, "bloke"}}));
  AnonymizationTrail t = Trace("a bloke", model);
  EXPECT_EQ(t.stop_reason, StopReason::kTextUnchanged);
  ASSERT_EQ(t.iterations.size(), 1u);
  EXPECT_EQ(t.final_text, "a bloke");
}

TEST(TraceLoopTest, StopsAtMaxIterations) {
  SimulatedProvider model(WithKeywords({{"bloke", "gender", "Male", 0.9, "hubby"},
                                        {"hubby", "gender", "Female", 0.8, "bloke"}}));
  AnonymizationTrail t = Trace("a bloke", model, 3);
  EXPECT_EQ(t.stop_reason, StopReason::kMaxIterations);
  ASSERT_EQ(t.iterations.size(), 3u);
  EXPECT_EQ(t.final_text, "a hubby");
  nlohmann::json j = t;
  EXPECT_EQ(j.at("stop_reason"), "max-iterations");
  EXPECT_EQ(j.get<AnonymizationTrail>().iterations.size(), 3u);
}

TEST(TraceLoopTest, ProviderErrorsStopTheLoop) {
  SimulatedModelConfig c = DefaultSimulatedConfig();
  c.context_limit = 10;
  SimulatedProvider model(c);
  AnonymizationTrail t = Trace("a bloke", model);
  EXPECT_EQ(t.stop_reason, StopReason::kErrored);
  EXPECT_NE(t.error.find("context-length-exceeded"), std::string::npos);
  EXPECT_EQ(t.final_text, "a bloke");
}

TEST(TraceLoopTest, ConfigValidation) {
  TraceLoopConfig c;
  c.max_iterations = 0;
  ExpectErrorCode(ErrorCode::kConfigInvalid, [&] { c.Validate(); });
  c = TraceLoopConfig{};
  c.confidence_threshold = 6;
  ExpectErrorCode(ErrorCode::kConfigInvalid, [&] { c.Validate(); });
}

}  // namespace
}  // namespace attrguard
