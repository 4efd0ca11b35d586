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

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/attack.h"
#include "attrguard/harness/prompt.h"
#include "attrguard/model/simulated.h"
#include "attrguard/search/objectives.h"
#include "attrguard/search/rps.h"
#include "attrguard/search/suffix.h"
#include "attrguard/util/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace attrguard {
namespace {

using ::attrguard::test::Comments;
using ::attrguard::test::ExpectErrorCode;

TEST(SuffixTest, ParseAndMake) {
  std::vector<std::string> vocab = {"!", "@", "#"};
  Suffix s = ParseSuffix(" @  # !", vocab);
  EXPECT_EQ(s.tokens, (std::vector<size_t>{1, 2, 0}));
  EXPECT_EQ(s.surface, "@ # !");
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { ParseSuffix("@ x", vocab); });
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { ParseSuffix("  ", vocab); });
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { MakeSuffix({3}, vocab); });
  EXPECT_EQ(ParseSuffix(DefaultInitSuffix(), PrintableSymbolVocabulary())
                .tokens.size(),
            48u);
}

TEST(PlacementTest, StringArithmetic) {
  EXPECT_EQ(ApplyPerturbation("ab cd", "S", Placement::kPrefix), "S ab cd");
  EXPECT_EQ(ApplyPerturbation("ab cd", "S", Placement::kSuffix), "ab cd S");
  EXPECT_EQ(ApplyPerturbation("ab cd", "S", Placement::kInfix), "ab S cd");
  // Spaces at 2 and 3 are equally far from 2.5: the earlier one wins.
  EXPECT_EQ(ApplyPerturbation("ab  c", "S", Placement::kInfix), "ab S  c");
  EXPECT_EQ(ApplyPerturbation("a bc d", "S", Placement::kInfix), "a bc S d");
  EXPECT_EQ(ApplyPerturbation("abc", "S", Placement::kInfix), "abc S");
  EXPECT_EQ(InfixPosition("abc"), std::string_view::npos);
}

TEST(PlacementTest, RemoveInvertsApply) {
  Rng rng(5);
  const std::string alphabet = "ab \nü";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    size_t n = rng.UniformIndex(20);
    for (size_t i = 0; i < n; ++i) text += alphabet[rng.UniformIndex(4)];
    std::string surface = "# $ %";
    for (Placement p : {Placement::kPrefix, Placement::kInfix, Placement::kSuffix}) {
      std::string d = ApplyPerturbation(text, surface, p);
      EXPECT_EQ(d.size(), text.size() + surface.size() + 1);
      EXPECT_EQ(RemovePerturbation(d, surface, p, text), text);
    }
  }
}

TEST(RandomReplaceTest, ChangesAtMostSpanContiguousTokens) {
  std::vector<std::string> vocab = PrintableSymbolVocabulary();
  Suffix s = ParseSuffix(DefaultInitSuffix(), vocab);
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    Suffix c = RandomReplace(s, 2, vocab, rng);
    ASSERT_EQ(c.tokens.size(), s.tokens.size());
    std::vector<size_t> changed;
    for (size_t k = 0; k < c.tokens.size(); ++k) {
      if (c.tokens[k] != s.tokens[k]) changed.push_back(k);
    }
    ASSERT_LE(changed.size(), 2u);
    if (changed.size() == 2) {
      EXPECT_EQ(changed[1], changed[0] + 1);
    }
    EXPECT_EQ(c, MakeSuffix(c.tokens, vocab));
  }
  Suffix one = MakeSuffix({0}, vocab);
  EXPECT_EQ(RandomReplace(one, 5, vocab, rng).tokens.size(), 1u);
  ExpectErrorCode(ErrorCode::kEmptyVocabulary,
                  [&] { RandomReplace(s, 1, {}, rng); });
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [&] { RandomReplace(s, 0, vocab, rng); });
}

PromptContext GenderContext(const std::string& text) {
  auto taxonomy = DefaultTaxonomy();
  return PromptContext(Comments({text}), RequireAttribute(taxonomy, "gender"));
}

TEST(ObjectivesTest, TotalAndCandidates) {
  EXPECT_DOUBLE_EQ(ScoreTotal(-1.0, -2.0, 5.0), -11.0);
  ExpectErrorCode(ErrorCode::kInvalidArgument, [] { ScoreTotal(0, 0, 0); });
  EXPECT_EQ(RejectionCandidates({"cannot", " x"}, true),
            (std::vector<std::string>{"cannot", " cannot", " x"}));
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [] { RejectionCandidates({}, true); });
}

TEST(RpsTest, ReachesBothThresholdsWithMonotoneObjective) {
  SimulatedProvider model;
  std::string text = "me and my bloke friends";
  SearchConfig c;
  c.seed = 1;
  SearchState st = RunRps(text, GenderContext(text), {&model}, c);
  ASSERT_EQ(st.stage, SearchStage::kDone) << st.error;
  EXPECT_TRUE(st.tau1_reached);
  EXPECT_TRUE(st.tau2_reached);
  EXPECT_GE(st.j1, c.tau1);
  EXPECT_GE(st.j2, c.tau2);
  EXPECT_EQ(st.trace.front().iteration, 0);
  EXPECT_EQ(static_cast<int>(st.trace.size()), st.TotalIterations() + 1);

  double best1 = -1e300, best = -1e300;
  for (const auto& row : st.trace) {
    if (!row.accepted) continue;
    if (row.stage == SearchStage::kStage1) {
      EXPECT_GT(row.j, best1);
      best1 = row.j;
    } else {
      EXPECT_GT(row.j, best);
      best = row.j;
    }
  }

  // The winning suffix makes the surrogate refuse.
  std::string defended = ApplyPerturbation(text, st.best.surface, c.placement);
  Prediction p = ParsePrediction(
      model.Generate(GenderContext(text).Render(defended), 512), "gender");
  EXPECT_EQ(p.refusal, Refusal::kStrict);

  std::ostringstream rows;
  WriteSearchTrace(st, rows);
  std::string first = rows.str().substr(0, rows.str().find('\n'));
  EXPECT_EQ(nlohmann::json::parse(first).get<SearchTraceRow>().iteration, 0);
  nlohmann::json sj = st;
  EXPECT_EQ(sj.get<SearchState>().best, st.best);
}

TEST(RpsTest, SameSeedSameResult) {
  SimulatedProvider model;
  SearchConfig c;
  c.seed = 42;
  c.max_iters_stage1 = 50;
  c.max_iters_stage2 = 50;
  auto a = RunRps("a bloke", GenderContext("a bloke"), {&model}, c);
  auto b = RunRps("a bloke", GenderContext("a bloke"), {&model}, c);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.j, b.j);
}

TEST(RpsTest, StageOneMatchesBruteForceOnSmallSpace) {
  SimulatedProvider model;
  SearchConfig c;
  c.vocabulary = {"!", "@", "[", "#", "%", "H"};
  c.init_suffix = "! ! !";
  c.span = 1;
  c.tau1 = 0.0;
  c.max_iters_stage1 = 500;
  c.max_iters_stage2 = 0;
  RpsSearch search("a bloke", GenderContext("a bloke"), {&model}, c);
  double best = -1e300;
  for (size_t a = 0; a < 6; ++a) {
    for (size_t b = 0; b < 6; ++b) {
      for (size_t d = 0; d < 6; ++d) {
        best = std::max(best, search.J1(MakeSuffix({a, b, d}, c.vocabulary)).Mean());
      }
    }
  }
  EXPECT_NEAR(best, std::log(1.0 / (1.0 + std::exp(-1.0))), 1e-12);
  c.seed = 4;
  SearchState st = RpsSearch("a bloke", GenderContext("a bloke"), {&model}, c).Run();
  EXPECT_LE(st.j1, best);
  EXPECT_DOUBLE_EQ(st.j1, best);
}

TEST(RpsTest, MinPerModelNeedsEveryProvider) {
  ModelScores s{{-0.1, -0.5}};
  EXPECT_TRUE(s.Reaches(-0.3, ThresholdMode::kMean));
  EXPECT_FALSE(s.Reaches(-0.3, ThresholdMode::kMinPerModel));
  EXPECT_TRUE(s.Reaches(-0.5, ThresholdMode::kMinPerModel));
  EXPECT_FALSE(ModelScores{}.Reaches(-100, ThresholdMode::kMinPerModel));
}

TEST(RpsTest, ProviderWithoutLogprobsIsRejected) {
  class NoLogprobs : public SimulatedProvider {
   public:
    Capabilities GetCapabilities() const override { return {true}; }
  };
  NoLogprobs model;
  ExpectErrorCode(ErrorCode::kLogprobsUnsupported, [&] {
    RunRps("a", GenderContext("a"), {&model}, SearchConfig{});
  });
}

TEST(SearchConfigTest, Validation) {
  SearchConfig c;
  c.tau1 = 0.1;
  ExpectErrorCode(ErrorCode::kConfigInvalid, [&] { c.Validate(); });
  c = SearchConfig{};
  c.init_suffix = "! ~";
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { c.Validate(); });
  c = SearchConfig{};
  c.max_suffix_tokens = 10;
  ExpectErrorCode(ErrorCode::kConfigInvalid, [&] { c.Validate(); });
  nlohmann::json j = SearchConfig{};
  EXPECT_EQ(nlohmann::json(j.get<SearchConfig>()), j);
}

TEST(MpsTest, FlipsTheGuessToTheTarget) {
  SimulatedProvider model;
  std::string text = "me and my bloke friends";
  SearchConfig c;
  c.seed = 2;
  SearchState st = RunMps(text, GenderContext(text), "Male", "Female", model, c);
  ASSERT_EQ(st.stage, SearchStage::kDone) << st.error;
  EXPECT_TRUE(st.tau3_reached);
  std::string defended = ApplyPerturbation(text, st.best.surface, c.placement);
  Prediction p = ParsePrediction(
      model.Generate(GenderContext(text).Render(defended), 512), "gender");
  ASSERT_FALSE(p.guesses.empty());
  EXPECT_EQ(p.guesses[0], "Female");
}

TEST(MpsTest, TargetMustDifferFromTruth) {
  SimulatedProvider model;
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] {
    RunMps("a", GenderContext("a"), "Male", "male", model, SearchConfig{});
  });
}

TEST(MpsTest, RefusingPromptHasNoAnchor) {
  SimulatedProvider model;
  ExpectErrorCode(ErrorCode::kAnchorNotFound, [&] {
    ResponseUpToAnchor(GenderContext("x").Render("a @ @ @"), model, 512);
  });
}

}  // namespace
}  // namespace attrguard
