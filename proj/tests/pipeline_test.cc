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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "attrguard/corpus/run_store.h"
#include "attrguard/pipeline/commands.h"
#include "attrguard/pipeline/run_config.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace attrguard {
namespace {

using ::attrguard::test::ExpectErrorCode;
using ::attrguard::test::FixturePath;
using ::attrguard::test::TempDir;
using json = nlohmann::json;

// Expects config-invalid with a message starting at `field`.
void ExpectConfigError(const json& j, const std::string& field) {
  try {
    ParseRunConfig(j);
    ADD_FAILURE() << "expected config-invalid for " << field;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid) << e.what();
    EXPECT_EQ(e.message().rfind(field + ":", 0), 0u) << e.message();
  }
}

TEST(RunConfigTest, Defaults) {
  RunConfig c = ParseRunConfig(json::object());
  EXPECT_EQ(c.attack_provider, "surrogate");
  ASSERT_EQ(c.providers.count("surrogate"), 1u);
  EXPECT_EQ(c.defense.kind, DefenseKind::kNone);
  EXPECT_EQ(c.jobs, 1);
  EXPECT_EQ(c.store, "runs");
}

TEST(RunConfigTest, ErrorsNameTheField) {
  ExpectConfigError(json::parse(R"({"bogus": 1})"), "bogus");
  ExpectConfigError(json::parse(R"({"attack": {"jobs": 2}})"), "attack.jobs");
  ExpectConfigError(json::parse(R"({"jobs": 0})"), "jobs");
  ExpectConfigError(json::parse(R"({"seed": "x"})"), "seed");
  ExpectConfigError(json::parse(R"({"defense": {"kind": "magic"}})"),
                    "defense.kind");
  ExpectConfigError(json::parse(R"({"attack": {"provider": "gpt"}})"),
                    "attack.provider");
  ExpectConfigError(
      json::parse(R"({"eval": {"adaptive": {"kind": "suffix-drop", "drop": 9}}})"),
      "eval.adaptive.drop");
  ExpectConfigError(
      json::parse(R"({"defense": {"search": {"placement": "middle"}}})"),
      "defense.search.placement");
  ExpectConfigError(json::parse(R"({"defense": {"search": {"tau1": 1.0}}})"),
                    "defense.search");
  ExpectConfigError(json::parse(R"({"attributes": ["shoe_size"]})"),
                    "attributes");
  ExpectConfigError(
      json::parse(R"({"providers": {"m": {"backend": "carrier-pigeon"}}})"),
      "providers.m.backend");
  ExpectConfigError(
      json::parse(R"({"providers": {"m": {"temperature": 0.7}}})"),
      "providers.m");
}

TEST(RunConfigTest, CredentialsAreNeverReadFromConfig) {
  for (const char* key : {"api_key", "key", "token", "password"}) {
    json j = {{"providers",
               {{"remote",
                 {{"backend", "http-completions"},
                  {"endpoint", "http://127.0.0.1:1"},
                  {key, "sk-secret"}}}}}};
    ExpectConfigError(j, std::string("providers.remote.") + key);
  }
}

TEST(RunConfigTest, MpsNeedsOneSearchProvider) {
  ExpectConfigError(json::parse(R"({
    "providers": {"a": {}, "b": {}},
    "attack": {"provider": "a"},
    "defense": {"kind": "mps", "search_providers": ["a", "b"]}})"),
                    "defense.search_providers");
}

TEST(RunConfigTest, RoundTripsThroughJson) {
  RunConfig c = ParseRunConfig(json::parse(R"({
    "dataset": "d.json", "seed": 7, "jobs": 2,
    "defense": {"kind": "trace+rps", "search": {"span": 3}},
    "eval": {"adaptive": {"kind": "suffix-drop", "drop": 16}}})"));
  json j = c;
  RunConfig back = ParseRunConfig(j);
  EXPECT_EQ(json(back), j);
  EXPECT_EQ(back.defense.search.span, 3u);
  EXPECT_EQ(back.attack.jobs, 2);
}

TEST(RunConfigTest, LoadReportsMalformedFiles) {
  TempDir dir;
  std::ofstream(dir.File("bad.json")) << "{ nope";
  ExpectErrorCode(ErrorCode::kConfigInvalid,
                  [&] { LoadRunConfig(dir.File("bad.json")); });
  ExpectErrorCode(ErrorCode::kConfigInvalid,
                  [&] { LoadRunConfig(dir.File("missing.json")); });
}

RunConfig BaseConfig(const TempDir& dir, const std::string& dataset) {
  RunConfig c = ParseRunConfig(json::object());
  c.dataset = FixturePath(dataset);
  c.store = dir.File("runs");
  return c;
}

TEST(PipelineTest, AttackOnFixture) {
  TempDir dir;
  RunConfig c = BaseConfig(dir, "profiles_20.json");
  CommandResult r = CmdAttack(c);
  EXPECT_EQ(r.run.kind, "attack");
  EXPECT_EQ(r.run.items.size(), 40u);
  EXPECT_DOUBLE_EQ(r.report.overall.top1, 1.0);
  EXPECT_EQ(RunStore(c.store).Load(r.run.id), r.run);
  EXPECT_EQ(CmdReport(c, r.run.id).overall.asr, r.report.overall.asr);
}

TEST(PipelineTest, NoDefenseEvalMatchesAttack) {
  TempDir dir;
  RunConfig c = BaseConfig(dir, "profiles_20.json");
  CommandResult attack = CmdAttack(c);
  CommandResult defend = CmdDefend(c);
  CommandResult eval = CmdEval(c, defend.run.id);
  EXPECT_EQ(eval.run.source_run, defend.run.id);
  ASSERT_EQ(eval.report.rows.size(), attack.report.rows.size());
  for (size_t i = 0; i < attack.report.rows.size(); ++i) {
    EXPECT_EQ(json(eval.report.rows[i]), json(attack.report.rows[i]));
  }
}

TEST(PipelineTest, RerunIsDeterministic) {
  TempDir dir;
  RunConfig c = BaseConfig(dir, "profiles_2.json");
  c.defense.kind = DefenseKind::kTraceRps;
  c.defense.search.max_iters_stage1 = 200;
  c.defense.search.max_iters_stage2 = 200;
  c.seed = 11;
  CommandResult a = CmdDefend(c);
  CommandResult b = CmdDefend(c);
  EXPECT_NE(a.run.id, b.run.id);
  EXPECT_EQ(json(a.run.items), json(b.run.items));
  EXPECT_TRUE(std::filesystem::is_directory(
      std::filesystem::path(c.store) / (a.run.id + ".search")));
}

TEST(PipelineTest, TraceAndRpsDefeatTheSurrogate) {
  TempDir dir;
  RunConfig c = BaseConfig(dir, "profiles_20.json");
  c.defense.kind = DefenseKind::kTraceRps;
  CommandResult defend = CmdDefend(c);
  CommandResult eval = CmdEval(c, defend.run.id);
  EXPECT_EQ(eval.report.overall.top1, 0.0);
  EXPECT_EQ(eval.report.overall.srr, 1.0);
  // Every item is rejected: ASR is the mean of 1/k.
  double expected = 0;
  for (const auto& item : eval.run.items) {
    expected += item.attribute == "gender" ? 1.0 / 2 : 1.0 / 4;
  }
  EXPECT_NEAR(eval.report.overall.asr, expected / eval.run.items.size(), 1e-12);
  for (const auto& item : defend.run.items) {
    EXPECT_FALSE(item.suffix.empty());
    EXPECT_NE(item.defended_text.find(item.suffix), std::string::npos);
  }
}

TEST(PipelineTest, SuffixDropEvaluatesShorterText) {
  TempDir dir;
  RunConfig c = BaseConfig(dir, "profiles_2.json");
  c.defense.kind = DefenseKind::kRps;
  c.defense.search.max_iters_stage1 = 100;
  c.defense.search.max_iters_stage2 = 100;
  CommandResult defend = CmdDefend(c);
  c.eval.adaptive = {AdaptiveKind::kSuffixDrop, 8, ""};
  CommandResult eval = CmdEval(c, defend.run.id);
  for (size_t i = 0; i < eval.run.items.size(); ++i) {
    EXPECT_EQ(eval.run.items[i].artifacts["attacked_text"],
              SuffixDrop(defend.run.items[i].defended_text, 8));
  }
}

TEST(PipelineTest, CapabilityMismatchIsReportedUpfront) {
  TempDir dir;
  RunConfig c = ParseRunConfig(json::parse(R"({
    "providers": {
      "surrogate": {},
      "remote": {"backend": "http-completions", "endpoint": "http://127.0.0.1:9"}},
    "defense": {"kind": "rps", "search_providers": ["remote"]}})"));
  c.dataset = FixturePath("profiles_2.json");
  c.store = dir.File("runs");
  try {
    CmdDefend(c);
    ADD_FAILURE() << "expected capability-mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapabilityMismatch);
    EXPECT_NE(e.message().find("defense.search_providers"), std::string::npos);
  }
  EXPECT_FALSE(std::filesystem::exists(c.store));
}

TEST(PipelineTest, MissingRun) {
  TempDir dir;
  RunConfig c = BaseConfig(dir, "profiles_2.json");
  ExpectErrorCode(ErrorCode::kRunNotFound, [&] { CmdEval(c, "defend-deadbeef"); });
  ExpectErrorCode(ErrorCode::kRunNotFound, [&] { CmdReport(c, "../x"); });
}

TEST(PipelineTest, ProvidersCheckListsCapabilities) {
  RunConfig c = ParseRunConfig(json::object());
  auto statuses = ProvidersCheck(c);
  ASSERT_EQ(statuses.size(), 1u);
  EXPECT_EQ(statuses[0].name, "surrogate");
  EXPECT_TRUE(statuses[0].capabilities.attention);
  EXPECT_TRUE(statuses[0].reachable);
}

TEST(MpsTargetTest, Preference) {
  auto taxonomy = DefaultTaxonomy();
  const auto& gender = RequireAttribute(taxonomy, "gender");
  Prediction baseline;
  baseline.guesses = {"Male", "Female"};
  EXPECT_EQ(ChooseMpsTarget(gender, "Male", baseline, "female"), "female");
  EXPECT_EQ(ChooseMpsTarget(gender, "Male", baseline, "male"), "Female");
  EXPECT_EQ(ChooseMpsTarget(gender, "Female", Prediction{}, ""), "Male");
  const auto& age = RequireAttribute(taxonomy, "age");
  EXPECT_EQ(ChooseMpsTarget(age, "30", Prediction{}, ""), "40");
  const auto& location = RequireAttribute(taxonomy, "location");
  EXPECT_FALSE(ChooseMpsTarget(location, "Zürich", Prediction{}, "").has_value());
}

}  // namespace
}  // namespace attrguard
