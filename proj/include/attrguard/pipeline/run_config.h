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

// The run configuration: one JSON document describing a dataset, named
// providers, the defense to apply and how to evaluate it.

#ifndef ATTRGUARD_PIPELINE_RUN_CONFIG_H_
#define ATTRGUARD_PIPELINE_RUN_CONFIG_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/attack.h"
#include "attrguard/harness/prediction.h"
#include "attrguard/metrics/metrics.h"
#include "attrguard/model/factory.h"
#include "attrguard/model/types.h"
#include "attrguard/search/rps.h"
#include "attrguard/status.h"
#include "attrguard/trace/loop.h"
#include "json.hpp"

namespace attrguard {

enum class DefenseKind { kNone, kTrace, kRps, kMps, kTraceRps, kTraceMps };

NLOHMANN_JSON_SERIALIZE_ENUM(DefenseKind,
                             {{DefenseKind::kNone, "none"},
                              {DefenseKind::kTrace, "trace"},
                              {DefenseKind::kRps, "rps"},
                              {DefenseKind::kMps, "mps"},
                              {DefenseKind::kTraceRps, "trace+rps"},
                              {DefenseKind::kTraceMps, "trace+mps"}})

inline bool ParseDefenseKind(std::string_view s, DefenseKind* out) {
  static const std::pair<std::string_view, DefenseKind> kNames[] = {
      {"none", DefenseKind::kNone},         {"trace", DefenseKind::kTrace},
      {"rps", DefenseKind::kRps},           {"mps", DefenseKind::kMps},
      {"trace+rps", DefenseKind::kTraceRps}, {"trace+mps", DefenseKind::kTraceMps}};
  for (const auto& [name, kind] : kNames) {
    if (s == name) {
      *out = kind;
      return true;
    }
  }
  return false;
}

inline bool UsesTrace(DefenseKind k) {
  return k == DefenseKind::kTrace || k == DefenseKind::kTraceRps ||
         k == DefenseKind::kTraceMps;
}
inline bool UsesRps(DefenseKind k) {
  return k == DefenseKind::kRps || k == DefenseKind::kTraceRps;
}
inline bool UsesMps(DefenseKind k) {
  return k == DefenseKind::kMps || k == DefenseKind::kTraceMps;
}

struct DefenseConfig {
  DefenseKind kind = DefenseKind::kNone;
  // Provider names; empty means the attack provider.
  std::string adversary;
  std::string anonymizer;
  std::string attention;
  // Surrogates scored by the suffix search; empty means the attack provider.
  std::vector<std::string> search_providers;
  TraceLoopConfig trace;
  SearchConfig search;
};

struct EvalConfig {
  // Empty means the attack provider.
  std::string provider;
  // adaptive.provider sanitizes text for llm-sanitize; empty means the
  // evaluation provider.
  AdaptiveAttack adaptive;
  // Embedding provider for semantic similarity; empty disables it.
  std::string similarity_provider;
};

struct RunConfig {
  std::string dataset;
  // Attribute specs replacing or extending the default taxonomy by name.
  std::vector<AttributeSpec> taxonomy_overrides;
  // Attributes to attack; empty means every taxonomy attribute present in the
  // dataset.
  std::vector<std::string> attributes;
  std::map<std::string, ProviderConfig> providers;
  std::string attack_provider = "surrogate";
  AttackOptions attack;
  DefenseConfig defense;
  EvalConfig eval;
  MetricsOptions metrics;
  std::string store = "runs";
  uint64_t seed = 0;
  int jobs = 1;

  std::vector<AttributeSpec> Taxonomy() const {
    std::vector<AttributeSpec> out = DefaultTaxonomy();
    for (const auto& o : taxonomy_overrides) {
      auto it = std::find_if(out.begin(), out.end(),
                             [&](const AttributeSpec& a) { return a.name == o.name; });
      if (it == out.end()) {
        out.push_back(o);
      } else {
        *it = o;
      }
    }
    return out;
  }

  std::string AdversaryName() const {
    return defense.adversary.empty() ? attack_provider : defense.adversary;
  }
  std::string AnonymizerName() const {
    return defense.anonymizer.empty() ? attack_provider : defense.anonymizer;
  }
  std::string AttentionName() const {
    return defense.attention.empty() ? attack_provider : defense.attention;
  }
  std::vector<std::string> SearchProviderNames() const {
    if (defense.search_providers.empty()) return {attack_provider};
    return defense.search_providers;
  }
  std::string EvalProviderName() const {
    return eval.provider.empty() ? attack_provider : eval.provider;
  }
  std::string SanitizerName() const {
    return eval.adaptive.provider.empty() ? EvalProviderName()
                                          : eval.adaptive.provider;
  }
};

namespace internal {

[[noreturn]] inline void ConfigError(const std::string& field,
                                     const std::string& what) {
  throw Error(ErrorCode::kConfigInvalid, field + ": " + what);
}

// Parses `j[key]` into `out` when present; type errors name the field.
template <typename T>
void ReadField(const nlohmann::json& j, const std::string& key,
               const std::string& locus, T* out) {
  if (!j.contains(key)) return;
  try {
    *out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    ConfigError(locus + key, e.what());
  } catch (const Error& e) {
    ConfigError(locus + key, e.message());
  }
}

inline void RequireObject(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) ConfigError(field, "must be a JSON object");
}

inline void CheckKeys(const nlohmann::json& j, const std::string& locus,
                      std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      ConfigError(locus + key, "unknown key");
    }
  }
}

}  // namespace internal

inline void to_json(nlohmann::json& j, const RunConfig& c);

namespace internal {

// Enum fields deserialize unknown spellings to their first value; a round
// trip through the parsed config exposes them.
inline void CheckEnumSpellings(const nlohmann::json& in, const RunConfig& c) {
  nlohmann::json out;
  to_json(out, c);
  auto check = [&](const std::string& pointer) {
    nlohmann::json::json_pointer ptr(pointer);
    if (!in.contains(ptr) || !out.contains(ptr)) return;
    if (in.at(ptr) != out.at(ptr)) {
      std::string field = pointer.substr(1);
      std::replace(field.begin(), field.end(), '/', '.');
      ConfigError(field, "unknown value " + in.at(ptr).dump());
    }
  };
  check("/defense/search/placement");
  check("/defense/search/threshold_mode");
  check("/eval/adaptive/kind");
  check("/attack/refusal/scope");
  for (size_t i = 0; i < c.taxonomy_overrides.size(); ++i) {
    check("/taxonomy/" + std::to_string(i) + "/kind");
    check("/taxonomy/" + std::to_string(i) + "/match_rule");
  }
}

}  // namespace internal

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  nlohmann::json providers = nlohmann::json::object();
  for (const auto& [name, p] : c.providers) providers[name] = p;
  j = nlohmann::json{
      {"dataset", c.dataset},
      {"taxonomy", c.taxonomy_overrides},
      {"attributes", c.attributes},
      {"providers", providers},
      {"attack",
       {{"provider", c.attack_provider},
        {"max_tokens", c.attack.max_tokens},
        {"refusal", c.attack.refusal}}},
      {"defense",
       {{"kind", c.defense.kind},
        {"adversary", c.defense.adversary},
        {"anonymizer", c.defense.anonymizer},
        {"attention", c.defense.attention},
        {"search_providers", c.defense.search_providers},
        {"trace", c.defense.trace},
        {"search", c.defense.search}}},
      {"eval",
       {{"provider", c.eval.provider},
        {"adaptive", c.eval.adaptive},
        {"similarity_provider", c.eval.similarity_provider}}},
      {"metrics", c.metrics},
      {"store", c.store},
      {"seed", c.seed},
      {"jobs", c.jobs}};
}

// Parses and validates a config document. Every failure is config-invalid
// and names the offending field.
inline RunConfig ParseRunConfig(const nlohmann::json& j) {
  using internal::ConfigError;
  using internal::ReadField;
  internal::RequireObject(j, "config");
  internal::CheckKeys(j, "",
                      {"dataset", "taxonomy", "attributes", "providers",
                       "attack", "defense", "eval", "metrics", "store", "seed",
                       "jobs"});
  RunConfig c;
  ReadField(j, "dataset", "", &c.dataset);
  ReadField(j, "taxonomy", "", &c.taxonomy_overrides);
  ReadField(j, "attributes", "", &c.attributes);
  ReadField(j, "store", "", &c.store);
  ReadField(j, "seed", "", &c.seed);
  ReadField(j, "jobs", "", &c.jobs);
  ReadField(j, "metrics", "", &c.metrics);

  if (j.contains("providers")) {
    const auto& ps = j.at("providers");
    internal::RequireObject(ps, "providers");
    for (const auto& [name, pj] : ps.items()) {
      std::string locus = "providers." + name;
      internal::RequireObject(pj, locus);
      for (const char* secret : {"api_key", "key", "token", "password"}) {
        if (pj.contains(secret)) {
          ConfigError(locus + "." + secret,
                      "credentials are read from the environment; name the "
                      "variable with api_key_env");
        }
      }
      ProviderConfig pc;
      if (pj.contains("backend")) {
        BackendKind kind = pj.at("backend").get<BackendKind>();
        if (nlohmann::json(kind) != pj.at("backend")) {
          ConfigError(locus + ".backend",
                      "unknown value " + pj.at("backend").dump());
        }
      }
      try {
        pc = pj.get<ProviderConfig>();
        pc.Validate();
      } catch (const nlohmann::json::exception& e) {
        ConfigError(locus, e.what());
      } catch (const Error& e) {
        ConfigError(locus, e.message());
      }
      c.providers[name] = pc;
    }
  } else {
    c.providers["surrogate"] = ProviderConfig{};
  }

  if (j.contains("attack")) {
    const auto& a = j.at("attack");
    internal::RequireObject(a, "attack");
    internal::CheckKeys(a, "attack.", {"provider", "max_tokens", "refusal"});
    ReadField(a, "provider", "attack.", &c.attack_provider);
    ReadField(a, "max_tokens", "attack.", &c.attack.max_tokens);
    ReadField(a, "refusal", "attack.", &c.attack.refusal);
  }

  if (j.contains("defense")) {
    const auto& d = j.at("defense");
    internal::RequireObject(d, "defense");
    internal::CheckKeys(d, "defense.",
                        {"kind", "adversary", "anonymizer", "attention",
                         "search_providers", "trace", "search"});
    if (d.contains("kind")) {
      std::string kind;
      ReadField(d, "kind", "defense.", &kind);
      if (!ParseDefenseKind(kind, &c.defense.kind)) {
        ConfigError("defense.kind",
                    "'" + kind +
                        "' is not one of none, trace, rps, mps, trace+rps, "
                        "trace+mps");
      }
    }
    ReadField(d, "adversary", "defense.", &c.defense.adversary);
    ReadField(d, "anonymizer", "defense.", &c.defense.anonymizer);
    ReadField(d, "attention", "defense.", &c.defense.attention);
    ReadField(d, "search_providers", "defense.", &c.defense.search_providers);
    ReadField(d, "trace", "defense.", &c.defense.trace);
    ReadField(d, "search", "defense.", &c.defense.search);
  }

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    internal::RequireObject(e, "eval");
    internal::CheckKeys(e, "eval.",
                        {"provider", "adaptive", "similarity_provider"});
    ReadField(e, "provider", "eval.", &c.eval.provider);
    ReadField(e, "adaptive", "eval.", &c.eval.adaptive);
    ReadField(e, "similarity_provider", "eval.", &c.eval.similarity_provider);
  }

  // Cross-field checks.
  if (c.jobs < 1) ConfigError("jobs", "must be >= 1");
  c.attack.jobs = c.jobs;
  if (c.attack.max_tokens < 1) ConfigError("attack.max_tokens", "must be >= 1");
  if (c.store.empty()) ConfigError("store", "must not be empty");

  auto require_provider = [&](const std::string& field, const std::string& name) {
    if (c.providers.find(name) == c.providers.end()) {
      ConfigError(field, "provider '" + name + "' is not declared in providers");
    }
  };
  require_provider("attack.provider", c.attack_provider);
  if (!c.defense.adversary.empty()) {
    require_provider("defense.adversary", c.defense.adversary);
  }
  if (!c.defense.anonymizer.empty()) {
    require_provider("defense.anonymizer", c.defense.anonymizer);
  }
  if (!c.defense.attention.empty()) {
    require_provider("defense.attention", c.defense.attention);
  }
  for (const auto& n : c.defense.search_providers) {
    require_provider("defense.search_providers", n);
  }
  if (!c.eval.provider.empty()) require_provider("eval.provider", c.eval.provider);
  if (!c.eval.adaptive.provider.empty()) {
    require_provider("eval.adaptive.provider", c.eval.adaptive.provider);
  }
  if (!c.eval.similarity_provider.empty()) {
    require_provider("eval.similarity_provider", c.eval.similarity_provider);
  }
  if (c.eval.adaptive.kind == AdaptiveKind::kSuffixDrop &&
      !IsValidDropLength(c.eval.adaptive.drop)) {
    ConfigError("eval.adaptive.drop", "must be one of 8, 16, 32, 64");
  }

  std::vector<AttributeSpec> taxonomy;
  try {
    for (const auto& a : c.taxonomy_overrides) a.Validate();
    taxonomy = c.Taxonomy();
  } catch (const Error& e) {
    ConfigError("taxonomy", e.message());
  }
  for (const auto& name : c.attributes) {
    if (FindAttribute(taxonomy, name) == nullptr) {
      ConfigError("attributes", "unknown attribute '" + name + "'");
    }
  }
  try {
    c.defense.trace.Validate();
  } catch (const Error& e) {
    ConfigError("defense.trace", e.message());
  }
  try {
    c.defense.search.Validate();
  } catch (const Error& e) {
    ConfigError("defense.search", e.message());
  }
  if (UsesMps(c.defense.kind) && c.SearchProviderNames().size() != 1) {
    ConfigError("defense.search_providers", "mps scores a single provider");
  }
  internal::CheckEnumSpellings(j, c);
  return c;
}

inline RunConfig LoadRunConfig(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfigInvalid, path + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.message());
  }
  return ParseRunConfig(j);
}

// The providers a run instantiates, keyed by declared name.
class ProviderSet {
 public:
  ProviderSet(const RunConfig& config, const std::vector<AttributeSpec>& taxonomy) {
    for (const auto& [name, pc] : config.providers) {
      providers_[name] = MakeProvider(pc, taxonomy, name);
    }
  }

  const Provider& Get(const std::string& name) const {
    auto it = providers_.find(name);
    if (it == providers_.end()) {
      throw Error(ErrorCode::kConfigInvalid,
                  "provider '" + name + "' is not declared in providers");
    }
    return *it->second;
  }

  const std::map<std::string, ProviderPtr>& all() const { return providers_; }

 private:
  std::map<std::string, ProviderPtr> providers_;
};

}  // namespace attrguard

#endif  // ATTRGUARD_PIPELINE_RUN_CONFIG_H_
