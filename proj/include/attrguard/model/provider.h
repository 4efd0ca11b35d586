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

#ifndef ATTRGUARD_MODEL_PROVIDER_H_
#define ATTRGUARD_MODEL_PROVIDER_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attrguard/model/types.h"
#include "attrguard/status.h"
#include "attrguard/util/strings.h"

namespace attrguard {

struct Capabilities {
  bool generate = false;
  bool logprobs = false;
  // Logprobs conditioned on an arbitrary forced prefix.
  bool forced_prefix = false;
  bool attention = false;
  bool embeddings = false;
};

// Uniform access to one language model. Implementations are immutable after
// construction and safe to call from several threads.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::string Name() const = 0;
  virtual Capabilities GetCapabilities() const = 0;

  virtual TokenizedText Tokenize(std::string_view text) const = 0;

  // Every value is <= 0. Candidates outside what the backend reports come
  // back at kLogProbFloor.
  virtual LogProbMap NextTokenLogprobs(const LogProbQuery& query) const = 0;

  // Greedy decoding.
  virtual std::string Generate(std::string_view prompt,
                               int max_tokens) const = 0;

  // Final-layer attention of the last prompt position over all prompt tokens,
  // aligned with Tokenize(prompt) and L1-normalised.
  virtual AttentionResponse AttentionLastLayer(
      std::string_view prompt) const = 0;

  virtual std::vector<double> Embed(std::string_view text) const = 0;
};

inline void ValidateLogProbQuery(const LogProbQuery& q) {
  if (q.candidates.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "logprob query has no candidates");
  }
  for (const auto& c : q.candidates) {
    if (Trim(c).empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "logprob candidate is empty or whitespace");
    }
  }
}

// log of the summed probability of the candidates in `map`, counting surface
// variants that share a token id once.
inline double LogProbabilityOfSet(const LogProbMap& map) {
  std::set<int64_t> seen_ids;
  std::vector<double> terms;
  for (const auto& [cand, lp] : map) {
    if (lp.token_id) {
      if (!seen_ids.insert(*lp.token_id).second) continue;
    }
    terms.push_back(lp.logprob);
  }
  if (terms.empty()) return kLogProbFloor;
  double mx = *std::max_element(terms.begin(), terms.end());
  double s = 0;
  for (double t : terms) s += std::exp(t - mx);
  return std::min(0.0, mx + std::log(s));
}

inline void RequireCapability(const Provider& p, bool ok, ErrorCode code,
                              std::string_view what) {
  if (!ok) {
    throw Error(code, "provider '" + p.Name() + "' does not support " +
                          std::string(what));
  }
}

}  // namespace attrguard

#endif  // ATTRGUARD_MODEL_PROVIDER_H_
