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

// The TRACE loop. Each iteration asks the adversary for a prediction with a
// 1-5 certainty, extracts the privacy vocabulary and an inference chain, and
// has the anonymizer rewrite the text using both. The loop stops when the
// certainty falls below the threshold, when a rewrite leaves the text
// unchanged, or after max_iterations rewrites.

#ifndef ATTRGUARD_TRACE_LOOP_H_
#define ATTRGUARD_TRACE_LOOP_H_

#include <string>
#include <string_view>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/attack.h"
#include "attrguard/harness/prediction.h"
#include "attrguard/harness/prompt.h"
#include "attrguard/harness/templates.h"
#include "attrguard/model/provider.h"
#include "attrguard/status.h"
#include "attrguard/trace/chain.h"
#include "attrguard/trace/vocabulary.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

struct TraceLoopConfig {
  int max_iterations = 5;
  int confidence_threshold = 2;
  // Certainty assumed when the adversary omits it.
  int default_confidence = 5;
  VocabularyOptions vocabulary;
  int max_tokens = 1024;

  void Validate() const {
    if (max_iterations < 1) {
      throw Error(ErrorCode::kConfigInvalid, "max_iterations must be >= 1");
    }
    if (confidence_threshold < 1 || confidence_threshold > 5) {
      throw Error(ErrorCode::kConfigInvalid,
                  "confidence_threshold must be in 1..5");
    }
    if (vocabulary.k < 1) {
      throw Error(ErrorCode::kConfigInvalid, "vocabulary k must be >= 1");
    }
  }
};

inline void to_json(nlohmann::json& j, const TraceLoopConfig& c) {
  j = nlohmann::json{{"max_iterations", c.max_iterations},
                     {"confidence_threshold", c.confidence_threshold},
                     {"default_confidence", c.default_confidence},
                     {"vocabulary", c.vocabulary},
                     {"max_tokens", c.max_tokens}};
}

inline void from_json(const nlohmann::json& j, TraceLoopConfig& c) {
  TraceLoopConfig d;
  c.max_iterations = j.value("max_iterations", d.max_iterations);
  c.confidence_threshold =
      j.value("confidence_threshold", d.confidence_threshold);
  c.default_confidence = j.value("default_confidence", d.default_confidence);
  c.vocabulary = j.value("vocabulary", d.vocabulary);
  c.max_tokens = j.value("max_tokens", d.max_tokens);
}

enum class StopReason {
  kConfidenceBelowThreshold,
  kTextUnchanged,
  kMaxIterations,
  kErrored,
};

NLOHMANN_JSON_SERIALIZE_ENUM(
    StopReason,
    {{StopReason::kConfidenceBelowThreshold, "confidence-below-threshold"},
     {StopReason::kTextUnchanged, "text-unchanged"},
     {StopReason::kMaxIterations, "max-iterations"},
     {StopReason::kErrored, "errored"}})

struct AnonymizationResult {
  std::string text;
  std::string raw_response;
  bool separator_missing = false;
};

struct TraceIteration {
  // Text the adversary saw in this iteration.
  std::string text;
  Prediction prediction;
  int confidence = 0;
  PrivacyVocabulary vocabulary;
  InferenceChain chain;
  // Empty when the loop stopped before rewriting.
  std::string anonymized_text;
  bool separator_missing = false;
};

struct AnonymizationTrail {
  std::string attribute;
  std::vector<TraceIteration> iterations;
  std::string final_text;
  StopReason stop_reason = StopReason::kMaxIterations;
  std::string error;
};

inline void to_json(nlohmann::json& j, const TraceIteration& it) {
  j = nlohmann::json{{"text", it.text},
                     {"prediction", it.prediction},
                     {"confidence", it.confidence},
                     {"vocabulary", it.vocabulary},
                     {"chain", it.chain},
                     {"anonymized_text", it.anonymized_text},
                     {"separator_missing", it.separator_missing}};
}

inline void from_json(const nlohmann::json& j, TraceIteration& it) {
  it.text = j.at("text").get<std::string>();
  it.prediction = j.at("prediction").get<Prediction>();
  it.confidence = j.at("confidence").get<int>();
  it.vocabulary = j.at("vocabulary").get<PrivacyVocabulary>();
  it.chain = j.at("chain").get<InferenceChain>();
  it.anonymized_text = j.value("anonymized_text", std::string());
  it.separator_missing = j.value("separator_missing", false);
}

inline void to_json(nlohmann::json& j, const AnonymizationTrail& t) {
  j = nlohmann::json{{"attribute", t.attribute},
                     {"iterations", t.iterations},
                     {"final_text", t.final_text},
                     {"stop_reason", t.stop_reason}};
  if (!t.error.empty()) j["error"] = t.error;
}

inline void from_json(const nlohmann::json& j, AnonymizationTrail& t) {
  t.attribute = j.at("attribute").get<std::string>();
  t.iterations = j.at("iterations").get<std::vector<TraceIteration>>();
  t.final_text = j.at("final_text").get<std::string>();
  t.stop_reason = j.at("stop_reason").get<StopReason>();
  t.error = j.value("error", std::string());
}

// Text after the first line that is exactly "#". Without such a line the
// whole response is used and flagged.
inline AnonymizationResult SplitAnonymizerResponse(std::string_view response) {
  AnonymizationResult out;
  out.raw_response = std::string(response);
  auto lines = Split(response, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]) == "#") {
      std::vector<std::string> rest(lines.begin() + i + 1, lines.end());
      out.text = std::string(Trim(Join(rest, "\n")));
      return out;
    }
  }
  out.text = std::string(Trim(response));
  out.separator_missing = true;
  return out;
}

inline std::string RenderPredictionForPrompt(const AttributeSpec& attribute,
                                             const Prediction& p) {
  std::string out = "Type: " + attribute.label + "\n";
  out += "Inference: " + p.inference_text + "\n";
  out += "Guess: " + Join(p.guesses, "; ");
  return out;
}

inline std::string AnonymizationPrompt(std::string_view text,
                                       const AttributeSpec& attribute,
                                       const PrivacyVocabulary& vocabulary,
                                       const InferenceChain& chain,
                                       const Prediction& prediction) {
  TemplateBindings b = {
      {"comments", std::string(text)},
      {"prediction", RenderPredictionForPrompt(attribute, prediction)},
      {"Top-K words", Join(vocabulary.Words(), ", ")},
      {"reasoning chain", chain.raw_text}};
  return FlattenPrompt(templates::kAnonymizerSystem,
                       RenderTemplate(templates::kAnonymizerUser, b));
}

inline AnonymizationResult AnonymizeStep(std::string_view text,
                                         const AttributeSpec& attribute,
                                         const PrivacyVocabulary& vocabulary,
                                         const InferenceChain& chain,
                                         const Prediction& prediction,
                                         const Provider& provider,
                                         int max_tokens = 1024) {
  RequireCapability(provider, provider.GetCapabilities().generate,
                    ErrorCode::kCapabilityMismatch, "generation");
  return SplitAnonymizerResponse(provider.Generate(
      AnonymizationPrompt(text, attribute, vocabulary, chain, prediction),
      max_tokens));
}

// Adversary certainty for one prediction. A strict refusal means the
// adversary could not infer anything.
inline int PredictionConfidence(const Prediction& p, int default_confidence) {
  if (p.refusal == Refusal::kStrict) return 1;
  return p.certainty.value_or(default_confidence);
}

inline AnonymizationTrail RunTraceLoop(const std::vector<Comment>& comments,
                                       const AttributeSpec& attribute,
                                       const Provider& adversary,
                                       const Provider& anonymizer,
                                       const Provider& attention,
                                       const TraceLoopConfig& config) {
  config.Validate();
  AnonymizationTrail trail;
  trail.attribute = attribute.name;
  std::string text = ProfileText(comments);
  PromptTemplate adversary_template = AdversaryTemplate();
  try {
    for (int i = 1; i <= config.max_iterations; ++i) {
      TraceIteration it;
      it.text = text;
      std::string response = adversary.Generate(
          BuildInferencePrompt(WithText(comments, text), attribute,
                               adversary_template)
              .Flat(),
          config.max_tokens);
      it.prediction = ParsePrediction(response, attribute.name);
      it.confidence =
          PredictionConfidence(it.prediction, config.default_confidence);
      if (it.confidence < config.confidence_threshold) {
        trail.iterations.push_back(std::move(it));
        trail.stop_reason = StopReason::kConfidenceBelowThreshold;
        break;
      }
      it.vocabulary =
          ExtractPrivacyVocabulary(text, attribute, attention, config.vocabulary);
      if (!it.prediction.guesses.empty()) {
        it.chain = GenerateInferenceChain(text, attribute, it.prediction,
                                          adversary, config.max_tokens);
      }
      AnonymizationResult rewrite =
          AnonymizeStep(text, attribute, it.vocabulary, it.chain,
                        it.prediction, anonymizer, config.max_tokens);
      it.anonymized_text = rewrite.text;
      it.separator_missing = rewrite.separator_missing;
      bool unchanged = rewrite.text == text;
      trail.iterations.push_back(std::move(it));
      if (unchanged) {
        trail.stop_reason = StopReason::kTextUnchanged;
        break;
      }
      text = rewrite.text;
      if (i == config.max_iterations) {
        trail.stop_reason = StopReason::kMaxIterations;
      }
    }
  } catch (const Error& e) {
    trail.stop_reason = StopReason::kErrored;
    trail.error = e.what();
  }
  trail.final_text = text;
  return trail;
}

}  // namespace attrguard

#endif  // ATTRGUARD_TRACE_LOOP_H_
