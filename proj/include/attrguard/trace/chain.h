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

// Inference chains: prompt construction and "Step n:" / "Evidence:" parsing.

#ifndef ATTRGUARD_TRACE_CHAIN_H_
#define ATTRGUARD_TRACE_CHAIN_H_

#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/prediction.h"
#include "attrguard/harness/templates.h"
#include "attrguard/model/provider.h"
#include "attrguard/status.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

struct ChainStep {
  std::string claim;
  std::string evidence;
  // First quoted segment of the evidence, if any.
  std::string quote;
  // False when the quote is not a substring of the source text.
  bool quote_verified = true;
  bool operator==(const ChainStep&) const = default;
};

struct InferenceChain {
  std::vector<ChainStep> steps;
  std::string raw_text;

  size_t QuoteViolations() const {
    size_t n = 0;
    for (const auto& s : steps) n += s.quote_verified ? 0 : 1;
    return n;
  }
  bool operator==(const InferenceChain&) const = default;
};

inline void to_json(nlohmann::json& j, const InferenceChain& c) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : c.steps) {
    steps.push_back({{"claim", s.claim},
                     {"evidence", s.evidence},
                     {"quote", s.quote},
                     {"quote_verified", s.quote_verified}});
  }
  j = nlohmann::json{{"steps", steps}, {"raw_text", c.raw_text}};
}

inline void from_json(const nlohmann::json& j, InferenceChain& c) {
  c.raw_text = j.value("raw_text", std::string());
  c.steps.clear();
  for (const auto& s : j.value("steps", nlohmann::json::array())) {
    c.steps.push_back({s.value("claim", std::string()),
                       s.value("evidence", std::string()),
                       s.value("quote", std::string()),
                       s.value("quote_verified", true)});
  }
}

// Text between the first pair of straight or curly double quotes.
inline std::string FirstQuote(std::string_view s) {
  static const std::vector<std::pair<std::string_view, std::string_view>>
      kPairs = {{"\"", "\""}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}};
  size_t best_open = std::string_view::npos;
  std::string result;
  for (const auto& [open, close] : kPairs) {
    size_t a = s.find(open);
    if (a == std::string_view::npos || a >= best_open) continue;
    size_t b = s.find(close, a + open.size());
    if (b == std::string_view::npos) continue;
    best_open = a;
    result = std::string(s.substr(a + open.size(), b - a - open.size()));
  }
  return result;
}

inline InferenceChain ParseInferenceChain(std::string_view raw,
                                          std::string_view source_text) {
  static const std::regex kStep(R"(^\s*Step\s*\d+\s*:\s*(.*)$)",
                                std::regex::icase);
  static const std::regex kEvidence(R"(^\s*Evidence\s*:\s*(.*)$)",
                                    std::regex::icase);
  InferenceChain chain;
  chain.raw_text = std::string(raw);
  for (const auto& line : Split(raw, '\n')) {
    std::smatch m;
    if (std::regex_match(line, m, kStep)) {
      chain.steps.push_back({std::string(Trim(m[1].str())), "", "", true});
    } else if (std::regex_match(line, m, kEvidence) && !chain.steps.empty()) {
      ChainStep& step = chain.steps.back();
      step.evidence = std::string(Trim(m[1].str()));
      step.quote = FirstQuote(step.evidence);
      step.quote_verified =
          step.quote.empty() ||
          source_text.find(step.quote) != std::string_view::npos;
    }
  }
  return chain;
}

inline std::string InferenceChainPrompt(std::string_view text,
                                        const AttributeSpec& attribute,
                                        const Prediction& prediction) {
  TemplateBindings b = {{"comments", std::string(text)},
                        {"target attribute", attribute.label},
                        {"inference", prediction.inference_text},
                        {"guess", Join(prediction.guesses, "; ")}};
  return FlattenPrompt(templates::kChainSystem,
                       RenderTemplate(templates::kChainUser, b));
}

inline InferenceChain GenerateInferenceChain(std::string_view text,
                                             const AttributeSpec& attribute,
                                             const Prediction& prediction,
                                             const Provider& provider,
                                             int max_tokens = 1024) {
  if (prediction.guesses.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "an inference chain needs a prediction with a guess");
  }
  RequireCapability(provider, provider.GetCapabilities().generate,
                    ErrorCode::kCapabilityMismatch, "generation");
  std::string raw = provider.Generate(
      InferenceChainPrompt(text, attribute, prediction), max_tokens);
  return ParseInferenceChain(raw, text);
}

}  // namespace attrguard

#endif  // ATTRGUARD_TRACE_CHAIN_H_
