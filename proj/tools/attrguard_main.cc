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

// attrguard command-line tool.
//
//   attrguard attack  --config run.json
//   attrguard defend  trace+rps --config run.json
//   attrguard eval    --config run.json --run defend-1a2b3c4d
//   attrguard report  --config run.json --run eval-1a2b3c4d
//   attrguard providers check --config run.json
//
// Every flag overrides the config key of the same meaning. Exit codes: 0 ok,
// 2 configuration error, 3 provider error, 4 data error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attrguard/corpus/profile.h"
#include "attrguard/metrics/report.h"
#include "attrguard/pipeline/commands.h"
#include "attrguard/pipeline/run_config.h"
#include "attrguard/status.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitProvider = 3;
constexpr int kExitData = 4;

int ExitCodeFor(attrguard::ErrorCode code) {
  using attrguard::ErrorCode;
  switch (code) {
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnboundPlaceholder:
      return kExitConfig;
    default:
      return attrguard::IsProviderError(code) ? kExitProvider : kExitData;
  }
}

// Flag values; unset optionals leave the config untouched.
struct Overrides {
  std::string config_path;
  std::optional<std::string> dataset;
  std::vector<std::string> attributes;
  std::optional<std::string> provider;
  std::optional<int> max_tokens;
  std::optional<std::string> store;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  // defend
  std::string defense_kind;
  std::optional<std::string> adversary;
  std::optional<std::string> anonymizer;
  std::optional<std::string> attention;
  std::vector<std::string> search_providers;
  std::optional<std::string> placement;
  std::optional<std::string> threshold_mode;
  std::optional<std::string> mps_target;
  bool mps_fallback = false;
  std::optional<int> max_iters_stage1;
  std::optional<int> max_iters_stage2;
  std::optional<int> max_iters_mps;
  std::optional<int> trace_max_iterations;
  std::optional<int> top_k;
  bool no_stopword_filter = false;
  // eval
  std::optional<std::string> eval_provider;
  std::optional<std::string> adaptive;
  std::optional<int> drop;
  std::optional<std::string> sanitizer;
  std::optional<std::string> similarity_provider;
  // eval / report
  std::string run_id;
  bool json_output = false;
  bool soft_refusals_reject = false;
};

template <typename T>
void Set(json& doc, const json::json_pointer& ptr, const std::optional<T>& v) {
  if (v) doc[ptr] = *v;
}

attrguard::RunConfig BuildConfig(const Overrides& o) {
  json doc = json::object();
  if (!o.config_path.empty()) {
    try {
      doc = json::parse(attrguard::ReadFile(o.config_path));
    } catch (const json::parse_error& e) {
      throw attrguard::Error(attrguard::ErrorCode::kConfigInvalid,
                             o.config_path + ": " + e.what());
    } catch (const attrguard::Error& e) {
      throw attrguard::Error(attrguard::ErrorCode::kConfigInvalid, e.message());
    }
    if (!doc.is_object()) {
      throw attrguard::Error(attrguard::ErrorCode::kConfigInvalid,
                             o.config_path + ": must be a JSON object");
    }
  }
  using P = json::json_pointer;
  Set(doc, P("/dataset"), o.dataset);
  if (!o.attributes.empty()) doc["attributes"] = o.attributes;
  Set(doc, P("/attack/provider"), o.provider);
  Set(doc, P("/attack/max_tokens"), o.max_tokens);
  Set(doc, P("/store"), o.store);
  Set(doc, P("/seed"), o.seed);
  Set(doc, P("/jobs"), o.jobs);
  if (!o.defense_kind.empty()) doc["defense"]["kind"] = o.defense_kind;
  Set(doc, P("/defense/adversary"), o.adversary);
  Set(doc, P("/defense/anonymizer"), o.anonymizer);
  Set(doc, P("/defense/attention"), o.attention);
  if (!o.search_providers.empty()) {
    doc["defense"]["search_providers"] = o.search_providers;
  }
  Set(doc, P("/defense/search/placement"), o.placement);
  Set(doc, P("/defense/search/threshold_mode"), o.threshold_mode);
  Set(doc, P("/defense/search/mps_target"), o.mps_target);
  if (o.mps_fallback) doc["defense"]["search"]["mps_fallback"] = true;
  Set(doc, P("/defense/search/max_iters_stage1"), o.max_iters_stage1);
  Set(doc, P("/defense/search/max_iters_stage2"), o.max_iters_stage2);
  Set(doc, P("/defense/search/max_iters_mps"), o.max_iters_mps);
  Set(doc, P("/defense/trace/max_iterations"), o.trace_max_iterations);
  Set(doc, P("/defense/trace/vocabulary/k"), o.top_k);
  if (o.no_stopword_filter) {
    doc["defense"]["trace"]["vocabulary"]["stopword_filter"] = false;
  }
  Set(doc, P("/eval/provider"), o.eval_provider);
  Set(doc, P("/eval/adaptive/kind"), o.adaptive);
  Set(doc, P("/eval/adaptive/drop"), o.drop);
  Set(doc, P("/eval/adaptive/provider"), o.sanitizer);
  Set(doc, P("/eval/similarity_provider"), o.similarity_provider);
  if (o.soft_refusals_reject) doc["metrics"]["soft_refusals_reject"] = true;
  return attrguard::ParseRunConfig(doc);
}

void PrintResult(const attrguard::CommandResult& r, bool as_json) {
  if (as_json) {
    std::cout << attrguard::ReportJson(r.report).dump(2) << "\n";
  } else {
    std::cout << "run: " << r.run.id << "\n" << attrguard::ReportText(r.report);
  }
}

void AddCommonFlags(CLI::App* cmd, Overrides* o) {
  cmd->add_option("--config", o->config_path, "Run configuration (JSON)");
  cmd->add_option("--dataset", o->dataset, "Profiles file (dataset)");
  cmd->add_option("--attribute", o->attributes,
                  "Attribute to attack, repeatable (attributes)");
  cmd->add_option("--provider", o->provider,
                  "Attack provider name (attack.provider)");
  cmd->add_option("--max-tokens", o->max_tokens, "attack.max_tokens");
  cmd->add_option("--store", o->store, "Run store directory (store)");
  cmd->add_option("--seed", o->seed, "seed");
  cmd->add_option("--jobs", o->jobs, "Worker cap (jobs)");
  cmd->add_flag("--soft-refusals-reject", o->soft_refusals_reject,
                "metrics.soft_refusals_reject");
  cmd->add_flag("--json", o->json_output, "Print the report as JSON");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute-inference attacks and defenses on user text"};
  app.require_subcommand(1);
  Overrides o;

  CLI::App* attack = app.add_subcommand("attack", "Attack every profile");
  AddCommonFlags(attack, &o);

  CLI::App* defend = app.add_subcommand("defend", "Defend every profile");
  AddCommonFlags(defend, &o);
  defend->add_option("kind", o.defense_kind,
                     "none | trace | rps | mps | trace+rps | trace+mps")
      ->required();
  defend->add_option("--adversary", o.adversary, "defense.adversary");
  defend->add_option("--anonymizer", o.anonymizer, "defense.anonymizer");
  defend->add_option("--attention", o.attention, "defense.attention");
  defend->add_option("--search-provider", o.search_providers,
                     "Search surrogate, repeatable (defense.search_providers)");
  defend->add_option("--placement", o.placement,
                     "prefix | infix | suffix (defense.search.placement)");
  defend->add_option("--threshold-mode", o.threshold_mode,
                     "mean | min-per-model (defense.search.threshold_mode)");
  defend->add_option("--mps-target", o.mps_target, "defense.search.mps_target");
  defend->add_flag("--mps-fallback", o.mps_fallback,
                   "defense.search.mps_fallback");
  defend->add_option("--max-iters-stage1", o.max_iters_stage1,
                     "defense.search.max_iters_stage1");
  defend->add_option("--max-iters-stage2", o.max_iters_stage2,
                     "defense.search.max_iters_stage2");
  defend->add_option("--max-iters-mps", o.max_iters_mps,
                     "defense.search.max_iters_mps");
  defend->add_option("--trace-max-iterations", o.trace_max_iterations,
                     "defense.trace.max_iterations");
  defend->add_option("--top-k", o.top_k, "defense.trace.vocabulary.k");
  defend->add_flag("--no-stopword-filter", o.no_stopword_filter,
                   "defense.trace.vocabulary.stopword_filter = false");

  CLI::App* eval = app.add_subcommand("eval", "Re-attack a defended run");
  AddCommonFlags(eval, &o);
  eval->add_option("--run", o.run_id, "Run id")->required();
  eval->add_option("--eval-provider", o.eval_provider, "eval.provider");
  eval->add_option("--adaptive", o.adaptive,
                   "none | suffix-drop | llm-sanitize (eval.adaptive.kind)");
  eval->add_option("--drop", o.drop, "8 | 16 | 32 | 64 (eval.adaptive.drop)");
  eval->add_option("--sanitizer", o.sanitizer, "eval.adaptive.provider");
  eval->add_option("--similarity-provider", o.similarity_provider,
                   "eval.similarity_provider");

  CLI::App* report = app.add_subcommand("report", "Metrics of a stored run");
  AddCommonFlags(report, &o);
  report->add_option("--run", o.run_id, "Run id")->required();

  CLI::App* providers = app.add_subcommand("providers", "Provider utilities");
  providers->require_subcommand(1);
  CLI::App* check =
      providers->add_subcommand("check", "List providers and capabilities");
  AddCommonFlags(check, &o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    attrguard::RunConfig config = BuildConfig(o);
    if (attack->parsed()) {
      PrintResult(attrguard::CmdAttack(config), o.json_output);
    } else if (defend->parsed()) {
      PrintResult(attrguard::CmdDefend(config), o.json_output);
    } else if (eval->parsed()) {
      PrintResult(attrguard::CmdEval(config, o.run_id), o.json_output);
    } else if (report->parsed()) {
      attrguard::EvalReport r = attrguard::CmdReport(config, o.run_id);
      if (o.json_output) {
        std::cout << attrguard::ReportJson(r).dump(2) << "\n";
      } else {
        std::cout << "run: " << r.run_id << "\n" << attrguard::ReportText(r);
      }
    } else if (check->parsed()) {
      bool all_ok = true;
      json out = json::array();
      for (const auto& s : attrguard::ProvidersCheck(config)) {
        all_ok = all_ok && s.reachable;
        out.push_back(s);
      }
      std::cout << out.dump(2) << "\n";
      if (!all_ok) return kExitProvider;
    }
  } catch (const attrguard::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}
