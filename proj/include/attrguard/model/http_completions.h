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

// OpenAI-compatible completion endpoints.
//
// "completions" mode posts to /v1/completions. A forced prefix is appended to
// the prompt, which is how teacher forcing works on a raw completion API.
// "chat" mode posts to /v1/chat/completions and cannot condition on a forced
// prefix. Next-token logprobs come from the top_logprobs list of the first
// generated position; candidates not in that list get kLogProbFloor.
//
// Attention, embeddings and tokenization are not served.

#ifndef ATTRGUARD_MODEL_HTTP_COMPLETIONS_H_
#define ATTRGUARD_MODEL_HTTP_COMPLETIONS_H_

#include <algorithm>
#include <map>
#include <memory>
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

class HttpCompletionsProvider : public Provider {
 public:
  HttpCompletionsProvider(std::unique_ptr<Transport> transport,
                          ProviderConfig config, std::string name)
      : transport_(std::move(transport)),
        config_(std::move(config)),
        name_(std::move(name)) {}

  std::string Name() const override { return name_; }

  Capabilities GetCapabilities() const override {
    Capabilities c;
    c.generate = true;
    c.logprobs = config_.logprobs;
    c.forced_prefix = config_.logprobs && config_.api == "completions";
    return c;
  }

  TokenizedText Tokenize(std::string_view) const override {
    throw Error(ErrorCode::kCapabilityMismatch,
                "provider '" + name_ + "' does not expose its tokenizer");
  }

  LogProbMap NextTokenLogprobs(const LogProbQuery& query) const override {
    ValidateLogProbQuery(query);
    RequireCapability(*this, config_.logprobs, ErrorCode::kLogprobsUnsupported,
                      "logprobs");
    std::map<std::string, double> top;
    if (config_.api == "chat") {
      if (!query.forced_prefix.empty()) {
        throw Error(ErrorCode::kLogprobsUnsupported,
                    "provider '" + name_ +
                        "' cannot score after a forced prefix in chat mode");
      }
      nlohmann::json body = ChatBody(query.prompt, 1);
      body["logprobs"] = true;
      body["top_logprobs"] = config_.top_logprobs;
      nlohmann::json r = transport_->Post("/v1/chat/completions", body);
      try {
        const auto& first =
            r.at("choices").at(0).at("logprobs").at("content").at(0);
        for (const auto& e : first.at("top_logprobs")) {
          Keep(top, e.at("token").get<std::string>(),
               e.at("logprob").get<double>());
        }
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kProviderError,
                    std::string("malformed chat logprobs: ") + e.what());
      }
    } else {
      nlohmann::json body = CompletionBody(query.prompt + query.forced_prefix, 1);
      body["logprobs"] = config_.top_logprobs;
      nlohmann::json r = transport_->Post("/v1/completions", body);
      try {
        const auto& first =
            r.at("choices").at(0).at("logprobs").at("top_logprobs").at(0);
        for (const auto& [tok, lp] : first.items()) {
          Keep(top, tok, lp.get<double>());
        }
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kProviderError,
                    std::string("malformed completion logprobs: ") + e.what());
      }
    }
    LogProbMap out;
    for (const auto& c : query.candidates) out[c] = Lookup(top, c);
    return out;
  }

  std::string Generate(std::string_view prompt, int max_tokens) const override {
    if (Trim(prompt).empty()) {
      throw Error(ErrorCode::kEmptyInput, "prompt is empty");
    }
    try {
      if (config_.api == "chat") {
        nlohmann::json r =
            transport_->Post("/v1/chat/completions", ChatBody(prompt, max_tokens));
        return r.at("choices").at(0).at("message").at("content").get<std::string>();
      }
      nlohmann::json r =
          transport_->Post("/v1/completions", CompletionBody(prompt, max_tokens));
      return r.at("choices").at(0).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderError,
                  std::string("malformed completion response: ") + e.what());
    }
  }

  AttentionResponse AttentionLastLayer(std::string_view) const override {
    throw Error(ErrorCode::kAttentionUnsupported,
                "provider '" + name_ + "' does not expose attention");
  }

  std::vector<double> Embed(std::string_view) const override {
    throw Error(ErrorCode::kEmbeddingsUnsupported,
                "provider '" + name_ + "' does not expose embeddings");
  }

 private:
  nlohmann::json CompletionBody(std::string_view prompt, int max_tokens) const {
    return {{"model", config_.model},
            {"prompt", prompt},
            {"temperature", 0},
            {"max_tokens", max_tokens}};
  }

  nlohmann::json ChatBody(std::string_view prompt, int max_tokens) const {
    return {{"model", config_.model},
            {"messages", {{{"role", "user"}, {"content", prompt}}}},
            {"temperature", 0},
            {"max_tokens", max_tokens}};
  }

  static void Keep(std::map<std::string, double>& top, const std::string& tok,
                   double lp) {
    auto it = top.find(tok);
    if (it == top.end() || lp > it->second) top[tok] = lp;
  }

  // The candidate's first token is the longest reported token that is a
  // prefix of it. Ids are synthesised from the token text so that candidates
  // resolving to the same token are counted once.
  static CandidateLogProb Lookup(const std::map<std::string, double>& top,
                                 const std::string& candidate) {
    CandidateLogProb out;
    const std::string* best = nullptr;
    for (const auto& [tok, lp] : top) {
      if (tok.empty() || Trim(tok).empty()) continue;
      if (candidate.compare(0, tok.size(), tok) == 0 &&
          (best == nullptr || tok.size() > best->size())) {
        best = &tok;
      }
    }
    if (best != nullptr) {
      out.logprob = std::max(kLogProbFloor, std::min(0.0, top.at(*best)));
      out.token_id = static_cast<int64_t>(Fnv1a64(*best) >> 1);
    }
    return out;
  }

  std::unique_ptr<Transport> transport_;
  ProviderConfig config_;
  std::string name_;
};

}  // namespace attrguard

#endif  // ATTRGUARD_MODEL_HTTP_COMPLETIONS_H_
