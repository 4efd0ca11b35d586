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

#ifndef ATTRGUARD_HARNESS_ATTACK_H_
#define ATTRGUARD_HARNESS_ATTACK_H_

#include <string>
#include <string_view>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/prediction.h"
#include "attrguard/harness/prompt.h"
#include "attrguard/harness/templates.h"
#include "attrguard/model/provider.h"
#include "attrguard/status.h"
#include "attrguard/util/parallel.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

struct AttackOptions {
  int max_tokens = 512;
  int jobs = 1;
  RefusalOptions refusal;
};

// Runs one attack prompt and parses it. Provider failures become an errored
// prediction.
inline Prediction AttackOne(const std::vector<Comment>& comments,
                            const AttributeSpec& attribute,
                            const PromptTemplate& tmpl, const Provider& provider,
                            const AttackOptions& options = {}) {
  try {
    std::string prompt = BuildInferencePrompt(comments, attribute, tmpl).Flat();
    std::string response = provider.Generate(prompt, options.max_tokens);
    return ParsePrediction(response, attribute.name, options.refusal);
  } catch (const Error& e) {
    return ErroredPrediction(attribute.name, e.what());
  }
}

// One prediction per profile, in input order. A failure on one profile never
// affects the others.
inline std::vector<Prediction> RunAttack(const std::vector<Profile>& profiles,
                                         const AttributeSpec& attribute,
                                         const PromptTemplate& tmpl,
                                         const Provider& provider,
                                         const AttackOptions& options = {}) {
  RequireCapability(provider, provider.GetCapabilities().generate,
                    ErrorCode::kCapabilityMismatch, "generation");
  std::vector<Prediction> out(profiles.size());
  ParallelFor(profiles.size(), options.jobs, [&](size_t i) {
    out[i] = AttackOne(profiles[i].comments, attribute, tmpl, provider, options);
  });
  return out;
}

// ---- adaptive attackers ---------------------------------------------------

enum class AdaptiveKind { kNone, kSuffixDrop, kLlmSanitize };

NLOHMANN_JSON_SERIALIZE_ENUM(AdaptiveKind,
                             {{AdaptiveKind::kNone, "none"},
                              {AdaptiveKind::kSuffixDrop, "suffix-drop"},
                              {AdaptiveKind::kLlmSanitize, "llm-sanitize"}})

struct AdaptiveAttack {
  AdaptiveKind kind = AdaptiveKind::kNone;
  // Characters dropped by suffix-drop; one of 8, 16, 32, 64.
  int drop = 0;
  // Provider name used by llm-sanitize.
  std::string provider;
};

inline void to_json(nlohmann::json& j, const AdaptiveAttack& a) {
  j = nlohmann::json{{"kind", a.kind}, {"drop", a.drop}, {"provider", a.provider}};
}

inline void from_json(const nlohmann::json& j, AdaptiveAttack& a) {
  a.kind = j.value("kind", AdaptiveKind::kNone);
  a.drop = j.value("drop", 0);
  a.provider = j.value("provider", std::string());
}

inline bool IsValidDropLength(int ell) {
  return ell == 8 || ell == 16 || ell == 32 || ell == 64;
}

// Removes the last `ell` characters (code points), or everything if the text
// is shorter.
inline std::string SuffixDrop(std::string_view text, int ell) {
  if (!IsValidDropLength(ell)) {
    throw Error(ErrorCode::kInvalidArgument,
                "suffix-drop length must be 8, 16, 32 or 64");
  }
  size_t n = CountCodePoints(text);
  size_t keep = n > static_cast<size_t>(ell) ? n - ell : 0;
  return std::string(text.substr(0, CodePointToByteOffset(text, keep)));
}

inline std::string SanitizePrompt(std::string_view text) {
  return FlattenPrompt(templates::kSanitizeSystem,
                       RenderTemplate(templates::kSanitizeUser,
                                      {{"text", std::string(text)}}));
}

inline std::string LlmSanitize(std::string_view text, const Provider& provider,
                               int max_tokens = 1024) {
  RequireCapability(provider, provider.GetCapabilities().generate,
                    ErrorCode::kCapabilityMismatch, "generation");
  return provider.Generate(SanitizePrompt(text), max_tokens);
}

inline std::string ApplyAdaptiveAttack(std::string_view text,
                                       const AdaptiveAttack& attack,
                                       const Provider* sanitizer = nullptr) {
  switch (attack.kind) {
    case AdaptiveKind::kNone:
      return std::string(text);
    case AdaptiveKind::kSuffixDrop:
      return SuffixDrop(text, attack.drop);
    case AdaptiveKind::kLlmSanitize:
      if (sanitizer == nullptr) {
        throw Error(ErrorCode::kConfigInvalid,
                    "llm-sanitize needs a sanitizer provider");
      }
      return LlmSanitize(text, *sanitizer);
  }
  return std::string(text);
}

}  // namespace attrguard

#endif  // ATTRGUARD_HARNESS_ATTACK_H_
