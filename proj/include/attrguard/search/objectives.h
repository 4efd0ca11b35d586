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

// Search objectives, all log-probabilities of the attacker's response:
//
//   J1 = log p(y1 = "I" | P(t'))
//   J2 = log sum_{r in R} p(y2 = r | P(t'), y1 = "I")
//   J  = J1 + beta * J2
//   J3 = log p(first token of the target value | P(t'), response up to and
//        including its last "Guess:")
//
// where t' is the text with the suffix applied and P the inference prompt.

#ifndef ATTRGUARD_SEARCH_OBJECTIVES_H_
#define ATTRGUARD_SEARCH_OBJECTIVES_H_

#include <string>
#include <string_view>
#include <vector>

#include "attrguard/model/provider.h"
#include "attrguard/status.h"
#include "attrguard/util/strings.h"

namespace attrguard {

inline constexpr std::string_view kRefusalLeadToken = "I";
inline constexpr std::string_view kGuessAnchor = "Guess:";

inline double ScoreStage1(std::string_view prompt, const Provider& provider) {
  RequireCapability(provider, provider.GetCapabilities().logprobs,
                    ErrorCode::kLogprobsUnsupported, "logprobs");
  LogProbQuery q{std::string(prompt), "", {std::string(kRefusalLeadToken)}};
  return provider.NextTokenLogprobs(q).at(std::string(kRefusalLeadToken)).logprob;
}

// Each member of the rejection set is scored together with its
// leading-space variant; variants that share a token id count once.
inline std::vector<std::string> RejectionCandidates(
    const std::vector<std::string>& rejection_set, bool space_variants) {
  if (rejection_set.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "rejection set is empty");
  }
  std::vector<std::string> out;
  for (const auto& r : rejection_set) {
    if (Trim(r).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "rejection token is empty");
    }
    out.push_back(r);
    if (space_variants && r.front() != ' ') out.push_back(" " + r);
  }
  return out;
}

inline double ScoreStage2(std::string_view prompt, const Provider& provider,
                          const std::vector<std::string>& rejection_set,
                          bool space_variants = true) {
  std::vector<std::string> candidates =
      RejectionCandidates(rejection_set, space_variants);
  RequireCapability(provider, provider.GetCapabilities().forced_prefix,
                    ErrorCode::kLogprobsUnsupported,
                    "logprobs after a forced prefix");
  LogProbQuery q{std::string(prompt), std::string(kRefusalLeadToken),
                 candidates};
  return LogProbabilityOfSet(provider.NextTokenLogprobs(q));
}

inline double ScoreTotal(double j1, double j2, double beta) {
  if (!(beta > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  }
  return j1 + beta * j2;
}

// Greedy response truncated after its last "Guess:" anchor.
inline std::string ResponseUpToAnchor(std::string_view prompt,
                                      const Provider& provider,
                                      int max_tokens) {
  std::string response = provider.Generate(prompt, max_tokens);
  size_t pos = response.rfind(kGuessAnchor);
  if (pos == std::string::npos) {
    throw Error(ErrorCode::kAnchorNotFound,
                "response contains no \"Guess:\" anchor");
  }
  return response.substr(0, pos + kGuessAnchor.size());
}

inline double ScoreMps(std::string_view prompt, std::string_view target_value,
                       const Provider& provider, int max_tokens = 512) {
  RequireCapability(provider, provider.GetCapabilities().forced_prefix,
                    ErrorCode::kLogprobsUnsupported,
                    "logprobs after a forced prefix");
  std::string first = FirstWord(target_value);
  if (first.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "MPS target value is empty");
  }
  LogProbQuery q{std::string(prompt),
                 ResponseUpToAnchor(prompt, provider, max_tokens),
                 {first, " " + first}};
  return LogProbabilityOfSet(provider.NextTokenLogprobs(q));
}

}  // namespace attrguard

#endif  // ATTRGUARD_SEARCH_OBJECTIVES_H_
