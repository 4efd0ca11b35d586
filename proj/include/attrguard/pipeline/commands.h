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

// The attack, defend, eval, report and provider-check commands. Each command
// validates provider capabilities before doing any work and persists its
// results as a run in the configured store.

#ifndef ATTRGUARD_PIPELINE_COMMANDS_H_
#define ATTRGUARD_PIPELINE_COMMANDS_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/corpus/run_store.h"
#include "attrguard/harness/attack.h"
#include "attrguard/harness/prompt.h"
#include "attrguard/metrics/metrics.h"
#include "attrguard/metrics/report.h"
#include "attrguard/model/sidecar.h"
#include "attrguard/pipeline/run_config.h"
#include "attrguard/search/rps.h"
#include "attrguard/search/suffix.h"
#include "attrguard/status.h"
#include "attrguard/trace/loop.h"
#include "attrguard/util/parallel.h"
#include "attrguard/util/random.h"
#include "json.hpp"

namespace attrguard {

// A stored run together with its metrics.
struct CommandResult {
  RunRecord run;
  EvalReport report;
};

namespace internal {

inline void RequireCap(const Provider& p, bool ok, const std::string& field,
                       const std::string& what) {
  if (!ok) {
    throw Error(ErrorCode::kCapabilityMismatch,
                field + ": provider '" + p.Name() + "' does not support " + what);
  }
}

// One (profile, attribute) pair to process.
struct WorkItem {
  size_t profile;
  const AttributeSpec* spec;
  std::string truth;
};

inline std::vector<std::string> SelectedAttributes(
    const RunConfig& config, const std::vector<AttributeSpec>& taxonomy,
    const std::vector<Profile>& profiles) {
  if (!config.attributes.empty()) return config.attributes;
  std::vector<std::string> out;
  for (const auto& spec : taxonomy) {
    for (const auto& p : profiles) {
      if (p.attributes.count(spec.name) > 0) {
        out.push_back(spec.name);
        break;
      }
    }
  }
  return out;
}

// Profile-major enumeration of the pairs that have ground truth.
inline std::vector<WorkItem> EnumerateItems(
    const RunConfig& config, const std::vector<AttributeSpec>& taxonomy,
    const std::vector<Profile>& profiles) {
  std::vector<std::string> names = SelectedAttributes(config, taxonomy, profiles);
  std::vector<WorkItem> items;
  for (size_t i = 0; i < profiles.size(); ++i) {
    for (const auto& name : names) {
      auto it = profiles[i].attributes.find(name);
      if (it == profiles[i].attributes.end()) continue;
      items.push_back({i, &RequireAttribute(taxonomy, name), it->second});
    }
  }
  if (items.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                "no profile has ground truth for the selected attributes");
  }
  return items;
}

inline std::vector<std::string> Dates(const std::vector<Comment>& comments) {
  std::vector<std::string> out;
  for (const auto& c : comments) out.push_back(c.date);
  return out;
}

// Comments rebuilt from stored dates and a (possibly edited) text.
inline std::vector<Comment> DatedComments(const std::vector<std::string>& dates,
                                          std::string_view text) {
  std::vector<Comment> stubs;
  for (const auto& d : dates) stubs.push_back({d, ""});
  return WithText(stubs, text);
}

inline RunItem NewItem(const Profile& profile, const WorkItem& w) {
  RunItem item;
  item.user_id = profile.user_id;
  item.attribute = w.spec->name;
  item.truth = w.truth;
  item.dates = Dates(profile.comments);
  item.original_text = ProfileText(profile.comments);
  item.defended_text = item.original_text;
  return item;
}

inline Prediction Attack(const RunItem& item, const std::string& text,
                         const AttributeSpec& spec, const Provider& provider,
                         const AttackOptions& options) {
  return AttackOne(DatedComments(item.dates, text), spec, InferenceTemplate(),
                   provider, options);
}

inline EvalReport Report(const RunRecord& run, const RunConfig& config) {
  return BuildReport(run, config.Taxonomy(), config.metrics);
}

inline CommandResult Persist(RunRecord run, const RunConfig& config) {
  EvalReport report = Report(run, config);
  // The record carries its own id; the summary does not repeat it.
  run.summary = ReportJson(report);
  run.summary.erase("run");
  RunStore store(config.store);
  run = store.Load(store.Save(std::move(run)));
  report.run_id = run.id;
  return {std::move(run), std::move(report)};
}

}  // namespace internal

// Capability checks for the providers each command touches. Failures are
// capability-mismatch naming the config field.
inline void CheckAttackCapabilities(const RunConfig& config,
                                    const ProviderSet& providers) {
  const Provider& p = providers.Get(config.attack_provider);
  internal::RequireCap(p, p.GetCapabilities().generate, "attack.provider",
                       "generation");
}

inline void CheckDefenseCapabilities(const RunConfig& config,
                                     const ProviderSet& providers) {
  CheckAttackCapabilities(config, providers);
  DefenseKind kind = config.defense.kind;
  if (UsesTrace(kind)) {
    const Provider& adv = providers.Get(config.AdversaryName());
    internal::RequireCap(adv, adv.GetCapabilities().generate,
                         "defense.adversary", "generation");
    const Provider& anon = providers.Get(config.AnonymizerName());
    internal::RequireCap(anon, anon.GetCapabilities().generate,
                         "defense.anonymizer", "generation");
    const Provider& att = providers.Get(config.AttentionName());
    internal::RequireCap(att, att.GetCapabilities().attention,
                         "defense.attention", "attention");
  }
  if (UsesRps(kind) || UsesMps(kind)) {
    for (const auto& name : config.SearchProviderNames()) {
      const Provider& p = providers.Get(name);
      internal::RequireCap(p, p.GetCapabilities().forced_prefix,
                           "defense.search_providers",
                           "logprobs after a forced prefix");
      if (UsesMps(kind) || config.defense.search.mps_fallback) {
        internal::RequireCap(p, p.GetCapabilities().generate,
                             "defense.search_providers", "generation");
      }
    }
  }
}

inline void CheckEvalCapabilities(const RunConfig& config,
                                  const ProviderSet& providers) {
  const Provider& p = providers.Get(config.EvalProviderName());
  internal::RequireCap(p, p.GetCapabilities().generate, "eval.provider",
                       "generation");
  if (config.eval.adaptive.kind == AdaptiveKind::kLlmSanitize) {
    const Provider& s = providers.Get(config.SanitizerName());
    internal::RequireCap(s, s.GetCapabilities().generate,
                         "eval.adaptive.provider", "generation");
  }
  if (!config.eval.similarity_provider.empty()) {
    const Provider& s = providers.Get(config.eval.similarity_provider);
    internal::RequireCap(s, s.GetCapabilities().embeddings,
                         "eval.similarity_provider", "embeddings");
  }
}

// Picks the incorrect value MPS steers toward: the configured target when it
// differs from the truth, else the adversary's highest-ranked wrong guess,
// else the first wrong option. Numeric attributes fall back to a value just
// outside the match tolerance. Returns nullopt when no candidate exists.
inline std::optional<std::string> ChooseMpsTarget(const AttributeSpec& spec,
                                                  std::string_view truth,
                                                  const Prediction& baseline,
                                                  std::string_view configured) {
  if (!configured.empty() && !ValueMatches(spec, configured, truth)) {
    return std::string(configured);
  }
  for (const auto& g : baseline.guesses) {
    if (!ValueMatches(spec, g, truth)) return g;
  }
  for (const auto& o : spec.options) {
    if (!ValueMatches(spec, o, truth)) return o;
  }
  if (spec.kind == AttributeKind::kNumeric) {
    if (auto t = ParseNumericGuess(truth)) {
      long long v = std::llround(*t + spec.tolerance + 5.0);
      return std::to_string(v);
    }
  }
  return std::nullopt;
}

inline CommandResult CmdAttack(const RunConfig& config) {
  std::vector<AttributeSpec> taxonomy = config.Taxonomy();
  ProviderSet providers(config, taxonomy);
  CheckAttackCapabilities(config, providers);
  std::vector<Profile> profiles = LoadProfiles(config.dataset, taxonomy);
  std::vector<internal::WorkItem> work =
      internal::EnumerateItems(config, taxonomy, profiles);
  const Provider& attacker = providers.Get(config.attack_provider);

  RunRecord run;
  run.kind = "attack";
  run.seed = config.seed;
  run.config = config;
  run.items.resize(work.size());
  ParallelFor(work.size(), config.jobs, [&](size_t i) {
    const internal::WorkItem& w = work[i];
    RunItem item = internal::NewItem(profiles[w.profile], w);
    item.prediction = internal::Attack(item, item.original_text, *w.spec,
                                       attacker, config.attack);
    run.items[i] = std::move(item);
  });
  return internal::Persist(std::move(run), config);
}

namespace internal {

struct DefendOutput {
  RunItem item;
  // JSONL rows of the suffix search, empty without one.
  std::string search_trace;
};

// Suffix search for one item on `text`; fills the defended text, suffix and
// artifacts.
inline void DefendWithSearch(const RunConfig& config, const ProviderSet& providers,
                             const Profile& profile, const WorkItem& w,
                             uint64_t item_seed, const std::string& text,
                             DefendOutput* out) {
  RunItem& item = out->item;
  DefenseKind kind = config.defense.kind;
  SearchConfig sc = config.defense.search;
  sc.seed = item_seed;
  std::vector<Comment> dated = WithText(profile.comments, text);
  PromptContext context(WithText(profile.comments, ProfileText(profile.comments)),
                        *w.spec);
  std::vector<const Provider*> search;
  for (const auto& name : config.SearchProviderNames()) {
    search.push_back(&providers.Get(name));
  }

  auto choose_target = [&]() -> std::optional<std::string> {
    Prediction baseline = AttackOne(dated, *w.spec, InferenceTemplate(),
                                    *search.front(), config.attack);
    return ChooseMpsTarget(*w.spec, w.truth, baseline, sc.mps_target);
  };

  std::optional<SearchState> state;
  if (UsesRps(kind)) {
    state = RunRps(text, context, search, sc);
    item.artifacts["rps"] = *state;
    if (sc.mps_fallback && state->stage != SearchStage::kErrored) {
      std::string defended =
          ApplyPerturbation(text, state->best.surface, sc.placement);
      Prediction check = Attack(item, defended, *w.spec, *search.front(),
                                config.attack);
      if (!check.guesses.empty()) {
        std::optional<std::string> target = choose_target();
        if (target) {
          item.artifacts["mps_target"] = *target;
          state = MpsSearch(text, context, w.truth, *target, search.front(), sc)
                      .Run(*state);
          item.artifacts["mps"] = *state;
        } else {
          item.artifacts["mps_error"] = "no incorrect target value available";
        }
      }
    }
  } else if (UsesMps(kind)) {
    std::optional<std::string> target = choose_target();
    if (!target) {
      item.artifacts["mps_error"] = "no incorrect target value available";
      return;
    }
    item.artifacts["mps_target"] = *target;
    state = RunMps(text, context, w.truth, *target, *search.front(), sc);
    item.artifacts["mps"] = *state;
  }
  if (!state) return;
  item.suffix = state->best.surface;
  item.defended_text = ApplyPerturbation(text, item.suffix, sc.placement);
  std::ostringstream rows;
  WriteSearchTrace(*state, rows);
  out->search_trace = rows.str();
}

}  // namespace internal

// Applies the configured defense to every (profile, attribute) pair. TRACE
// runs first, once per attribute on the profile's evolving text; the suffix
// search then optimizes on the anonymized text.
inline CommandResult CmdDefend(const RunConfig& config) {
  std::vector<AttributeSpec> taxonomy = config.Taxonomy();
  ProviderSet providers(config, taxonomy);
  CheckDefenseCapabilities(config, providers);
  std::vector<Profile> profiles = LoadProfiles(config.dataset, taxonomy);
  std::vector<internal::WorkItem> work =
      internal::EnumerateItems(config, taxonomy, profiles);
  const Provider& attacker = providers.Get(config.attack_provider);
  DefenseKind kind = config.defense.kind;

  // Items grouped by profile so TRACE can share the anonymized text.
  std::vector<std::vector<size_t>> by_profile(profiles.size());
  for (size_t i = 0; i < work.size(); ++i) by_profile[work[i].profile].push_back(i);

  std::vector<internal::DefendOutput> outputs(work.size());
  ParallelFor(profiles.size(), config.jobs, [&](size_t p) {
    const Profile& profile = profiles[p];
    std::string text = ProfileText(profile.comments);
    nlohmann::json trails = nlohmann::json::array();
    if (UsesTrace(kind)) {
      for (size_t i : by_profile[p]) {
        AnonymizationTrail trail = RunTraceLoop(
            WithText(profile.comments, text), *work[i].spec,
            providers.Get(config.AdversaryName()),
            providers.Get(config.AnonymizerName()),
            providers.Get(config.AttentionName()), config.defense.trace);
        text = trail.final_text;
        trails.push_back(trail);
      }
    }
    for (size_t i : by_profile[p]) {
      internal::DefendOutput& out = outputs[i];
      out.item = internal::NewItem(profile, work[i]);
      out.item.defended_text = text;
      if (UsesTrace(kind)) out.item.artifacts["trace"] = trails;
      internal::DefendWithSearch(config, providers, profile, work[i],
                                 DeriveSeed(config.seed, i), text, &out);
      out.item.prediction = internal::Attack(out.item, out.item.defended_text,
                                             *work[i].spec, attacker,
                                             config.attack);
    }
  });

  RunRecord run;
  run.kind = "defend";
  run.seed = config.seed;
  run.config = config;
  for (auto& o : outputs) run.items.push_back(o.item);
  CommandResult result = internal::Persist(std::move(run), config);

  bool any_trace = false;
  for (const auto& o : outputs) any_trace = any_trace || !o.search_trace.empty();
  if (any_trace) {
    std::filesystem::path dir =
        std::filesystem::path(config.store) / (result.run.id + ".search");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
    for (size_t i = 0; i < outputs.size(); ++i) {
      if (outputs[i].search_trace.empty()) continue;
      std::filesystem::path f =
          dir / (std::to_string(i) + "_" + outputs[i].item.user_id + "_" +
                 outputs[i].item.attribute + ".jsonl");
      std::ofstream os(f, std::ios::binary | std::ios::trunc);
      os << outputs[i].search_trace;
      if (!os) throw Error(ErrorCode::kIoError, "cannot write " + f.string());
    }
  }
  return result;
}

// Re-attacks the defended texts of a stored run with the evaluation provider,
// after the configured adaptive preprocessing.
inline CommandResult CmdEval(const RunConfig& config, const std::string& run_id) {
  std::vector<AttributeSpec> taxonomy = config.Taxonomy();
  RunStore store(config.store);
  RunRecord source = store.Load(run_id);
  ProviderSet providers(config, taxonomy);
  CheckEvalCapabilities(config, providers);
  const Provider& attacker = providers.Get(config.EvalProviderName());
  const Provider* sanitizer =
      config.eval.adaptive.kind == AdaptiveKind::kLlmSanitize
          ? &providers.Get(config.SanitizerName())
          : nullptr;
  const Provider* embedder =
      config.eval.similarity_provider.empty()
          ? nullptr
          : &providers.Get(config.eval.similarity_provider);

  RunRecord run;
  run.kind = "eval";
  run.source_run = source.id;
  run.seed = config.seed;
  run.config = config;
  run.config["source_run"] = source.id;
  run.items.resize(source.items.size());
  ParallelFor(source.items.size(), config.jobs, [&](size_t i) {
    RunItem item = source.items[i];
    const AttributeSpec& spec = RequireAttribute(taxonomy, item.attribute);
    try {
      std::string attacked = ApplyAdaptiveAttack(item.defended_text,
                                                 config.eval.adaptive, sanitizer);
      item.artifacts = {{"attacked_text", attacked}};
      item.prediction = internal::Attack(item, attacked, spec, attacker,
                                         config.attack);
    } catch (const Error& e) {
      item.artifacts = nlohmann::json::object();
      item.prediction = ErroredPrediction(item.attribute, e.what());
    }
    if (embedder != nullptr) {
      item.similarity =
          SemanticSimilarity(item.original_text, item.defended_text, *embedder);
    }
    run.items[i] = std::move(item);
  });
  return internal::Persist(std::move(run), config);
}

inline EvalReport CmdReport(const RunConfig& config, const std::string& run_id) {
  return internal::Report(RunStore(config.store).Load(run_id), config);
}

struct ProviderStatus {
  std::string name;
  BackendKind backend;
  Capabilities capabilities;
  bool reachable = true;
  std::string error;
};

inline void to_json(nlohmann::json& j, const ProviderStatus& s) {
  j = nlohmann::json{{"name", s.name},
                     {"backend", s.backend},
                     {"capabilities",
                      {{"generate", s.capabilities.generate},
                       {"logprobs", s.capabilities.logprobs},
                       {"forced_prefix", s.capabilities.forced_prefix},
                       {"attention", s.capabilities.attention},
                       {"embeddings", s.capabilities.embeddings}}},
                     {"reachable", s.reachable}};
  if (!s.error.empty()) j["error"] = s.error;
}

// Lists every declared provider with its capabilities. Sidecars are probed
// through /healthz.
inline std::vector<ProviderStatus> ProvidersCheck(const RunConfig& config) {
  std::vector<AttributeSpec> taxonomy = config.Taxonomy();
  ProviderSet providers(config, taxonomy);
  std::vector<ProviderStatus> out;
  for (const auto& [name, provider] : providers.all()) {
    ProviderStatus s;
    s.name = name;
    s.backend = config.providers.at(name).backend;
    s.capabilities = provider->GetCapabilities();
    if (auto* sidecar = dynamic_cast<const SidecarProvider*>(provider.get())) {
      try {
        sidecar->Health();
      } catch (const Error& e) {
        s.reachable = false;
        s.error = e.what();
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace attrguard

#endif  // ATTRGUARD_PIPELINE_COMMANDS_H_
