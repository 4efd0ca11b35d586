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

#ifndef ATTRGUARD_MODEL_TYPES_H_
#define ATTRGUARD_MODEL_TYPES_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attrguard/status.h"
#include "json.hpp"

namespace attrguard {

// Log-probability reported for candidates that a backend does not return
// (outside its top-logprobs set, or outside the simulated model's support).
inline constexpr double kLogProbFloor = -20.0;

// Byte offsets into the tokenized text, half open.
struct TokenSpan {
  size_t begin = 0;
  size_t end = 0;
  bool operator==(const TokenSpan&) const = default;
};

// Spans are non-overlapping and increasing. Backends that fold leading
// whitespace into a token ("▁word", "Ġword") report spans that exclude it, so
// text[begin, end) is always the visible surface of the token and the bytes
// between consecutive spans are whitespace.
struct TokenizedText {
  std::vector<int64_t> ids;
  std::vector<std::string> pieces;
  std::vector<TokenSpan> spans;

  size_t size() const { return ids.size(); }
};

struct LogProbQuery {
  std::string prompt;
  // Tokens treated as already generated before the scored position.
  std::string forced_prefix;
  std::vector<std::string> candidates;
};

struct CandidateLogProb {
  double logprob = kLogProbFloor;
  // First token id of the candidate when the backend reports it; lets callers
  // collapse surface variants that share one id.
  std::optional<int64_t> token_id;
};

using LogProbMap = std::map<std::string, CandidateLogProb>;

// One non-negative weight per prompt token.
struct AttentionResponse {
  std::vector<double> weights;
};

enum class BackendKind { kSimulated, kHttpCompletions, kSidecar };

NLOHMANN_JSON_SERIALIZE_ENUM(BackendKind,
                             {{BackendKind::kSimulated, "simulated"},
                              {BackendKind::kHttpCompletions,
                               "http-completions"},
                              {BackendKind::kSidecar, "sidecar"}})

struct ProviderConfig {
  BackendKind backend = BackendKind::kSimulated;
  std::string endpoint;
  std::string model = "surrogate";
  double timeout_seconds = 60.0;
  int retries = 2;
  // Evaluation runs are greedy; anything but 0 is rejected.
  double temperature = 0.0;
  int max_tokens = 512;

  // http-completions only.
  std::string api = "completions";  // "completions" | "chat"
  bool logprobs = false;
  int top_logprobs = 20;
  std::string api_key_env = "OPENAI_API_KEY";

  // sidecar only: mean | max | index:<i>
  std::string head_reduction = "mean";

  // Recorded responses for offline replay of remote backends.
  std::string cassette;
  std::string cassette_mode = "replay";  // "replay" | "record"

  // Overrides for the simulated surrogate (keywords, triggers, ...).
  nlohmann::json simulated = nlohmann::json::object();

  void Validate() const {
    if (temperature != 0.0) {
      throw Error(ErrorCode::kConfigInvalid,
                  "provider temperature must be 0 (greedy decoding)");
    }
    if (backend != BackendKind::kSimulated && endpoint.empty() &&
        cassette.empty()) {
      throw Error(ErrorCode::kConfigInvalid,
                  "remote provider needs an endpoint or a cassette");
    }
    if (api != "completions" && api != "chat") {
      throw Error(ErrorCode::kConfigInvalid, "api must be completions or chat");
    }
    if (cassette_mode != "replay" && cassette_mode != "record") {
      throw Error(ErrorCode::kConfigInvalid,
                  "cassette_mode must be replay or record");
    }
    if (retries < 0 || timeout_seconds <= 0 || max_tokens < 1) {
      throw Error(ErrorCode::kConfigInvalid,
                  "retries, timeout and max_tokens must be positive");
    }
  }
};

inline void to_json(nlohmann::json& j, const ProviderConfig& c) {
  j = nlohmann::json{{"backend", c.backend},
                     {"endpoint", c.endpoint},
                     {"model", c.model},
                     {"timeout_seconds", c.timeout_seconds},
                     {"retries", c.retries},
                     {"temperature", c.temperature},
                     {"max_tokens", c.max_tokens},
                     {"api", c.api},
                     {"logprobs", c.logprobs},
                     {"top_logprobs", c.top_logprobs},
                     {"api_key_env", c.api_key_env},
                     {"head_reduction", c.head_reduction},
                     {"cassette", c.cassette},
                     {"cassette_mode", c.cassette_mode},
                     {"simulated", c.simulated}};
}

inline void from_json(const nlohmann::json& j, ProviderConfig& c) {
  ProviderConfig d;
  c.backend = j.value("backend", d.backend);
  c.endpoint = j.value("endpoint", d.endpoint);
  c.model = j.value("model", d.model);
  c.timeout_seconds = j.value("timeout_seconds", d.timeout_seconds);
  c.retries = j.value("retries", d.retries);
  c.temperature = j.value("temperature", d.temperature);
  c.max_tokens = j.value("max_tokens", d.max_tokens);
  c.api = j.value("api", d.api);
  c.logprobs = j.value("logprobs", d.logprobs);
  c.top_logprobs = j.value("top_logprobs", d.top_logprobs);
  c.api_key_env = j.value("api_key_env", d.api_key_env);
  c.head_reduction = j.value("head_reduction", d.head_reduction);
  c.cassette = j.value("cassette", d.cassette);
  c.cassette_mode = j.value("cassette_mode", d.cassette_mode);
  c.simulated = j.value("simulated", nlohmann::json::object());
}

inline double LogSigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double Sigmoid(double x) { return std::exp(LogSigmoid(x)); }

inline double CosineSimilarity(const std::vector<double>& a,
                               const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "embedding sizes differ");
  }
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace attrguard

#endif  // ATTRGUARD_MODEL_TYPES_H_
