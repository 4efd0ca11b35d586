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

// Client for the model sidecar. Request and response bodies are described by
// the JSON schemas under protocol/. Spans on the wire are code-point offsets;
// they are converted to byte offsets here.

#ifndef ATTRGUARD_MODEL_SIDECAR_H_
#define ATTRGUARD_MODEL_SIDECAR_H_

#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attrguard/model/provider.h"
#include "attrguard/model/transport.h"
#include "attrguard/model/types.h"
#include "attrguard/status.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

inline bool IsValidHeadReduction(std::string_view s) {
  static const std::regex kPattern(R"(^(mean|max|index:\d+)$)");
  return std::regex_match(std::string(s), kPattern);
}

class SidecarProvider : public Provider {
 public:
  SidecarProvider(std::unique_ptr<Transport> transport, ProviderConfig config,
                  std::string name)
      : transport_(std::move(transport)),
        config_(std::move(config)),
        name_(std::move(name)) {
    if (!IsValidHeadReduction(config_.head_reduction)) {
      throw Error(ErrorCode::kConfigInvalid,
                  "head_reduction must be mean, max or index:<i>");
    }
  }

  std::string Name() const override { return name_; }

  Capabilities GetCapabilities() const override {
    return {true, true, true, true, true};
  }

  nlohmann::json Health() const { return transport_->Get("/healthz"); }

  TokenizedText Tokenize(std::string_view text) const override {
    if (Trim(text).empty()) {
      throw Error(ErrorCode::kEmptyInput, "cannot tokenize empty text");
    }
    nlohmann::json r = transport_->Post("/tokenize", {{"text", text}});
    TokenizedText out;
    try {
      out.ids = r.at("ids").get<std::vector<int64_t>>();
      out.pieces = r.value("pieces", std::vector<std::string>{});
      for (const auto& s : r.at("spans")) {
        size_t b = s.at(0).get<size_t>();
        size_t e = s.at(1).get<size_t>();
        out.spans.push_back(
            {CodePointToByteOffset(text, b), CodePointToByteOffset(text, e)});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderError,
                  std::string("malformed /tokenize response: ") + e.what());
    }
    if (out.spans.size() != out.ids.size()) {
      throw Error(ErrorCode::kProviderError,
                  "/tokenize returned mismatched ids and spans");
    }
    if (out.pieces.size() != out.ids.size()) {
      out.pieces.clear();
      for (const auto& s : out.spans) {
        out.pieces.emplace_back(text.substr(s.begin, s.end - s.begin));
      }
    }
    return out;
  }

  LogProbMap NextTokenLogprobs(const LogProbQuery& query) const override {
    ValidateLogProbQuery(query);
    nlohmann::json r = transport_->Post(
        "/logprobs", {{"prompt", query.prompt},
                      {"forced_prefix", query.forced_prefix},
                      {"candidates", query.candidates}});
    LogProbMap out;
    try {
      const auto& lps = r.at("logprobs");
      nlohmann::json ids = r.value("token_ids", nlohmann::json::object());
      for (const auto& c : query.candidates) {
        CandidateLogProb lp;
        if (lps.contains(c)) {
          lp.logprob = std::min(0.0, lps.at(c).get<double>());
        }
        if (ids.contains(c)) lp.token_id = ids.at(c).get<int64_t>();
        out[c] = lp;
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderError,
                  std::string("malformed /logprobs response: ") + e.what());
    }
    return out;
  }

  std::string Generate(std::string_view prompt, int max_tokens) const override {
    if (Trim(prompt).empty()) {
      throw Error(ErrorCode::kEmptyInput, "prompt is empty");
    }
    nlohmann::json r = transport_->Post(
        "/generate",
        {{"prompt", prompt}, {"max_tokens", max_tokens}, {"temperature", 0}});
    if (!r.contains("text") || !r.at("text").is_string()) {
      throw Error(ErrorCode::kProviderError, "malformed /generate response");
    }
    return r.at("text").get<std::string>();
  }

  AttentionResponse AttentionLastLayer(std::string_view prompt) const override {
    nlohmann::json r = transport_->Post(
        "/attention", {{"prompt", prompt},
                       {"head_reduction", config_.head_reduction},
                       {"normalize", true}});
    AttentionResponse out;
    try {
      out.weights = r.at("weights").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderError,
                  std::string("malformed /attention response: ") + e.what());
    }
    for (double w : out.weights) {
      if (!(w >= 0.0)) {
        throw Error(ErrorCode::kProviderError,
                    "/attention returned a negative weight");
      }
    }
    return out;
  }

  std::vector<double> Embed(std::string_view text) const override {
    nlohmann::json r = transport_->Post("/embed", {{"text", text}});
    try {
      return r.at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderError,
                  std::string("malformed /embed response: ") + e.what());
    }
  }

 private:
  std::unique_ptr<Transport> transport_;
  ProviderConfig config_;
  std::string name_;
};

}  // namespace attrguard

#endif  // ATTRGUARD_MODEL_SIDECAR_H_
