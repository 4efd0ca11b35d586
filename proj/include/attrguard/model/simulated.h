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

// A deterministic surrogate attacker whose every output can be checked by
// hand.
//
// Tokenizer: whitespace split. Suffix searches draw from a closed vocabulary
// of the 64 printable symbols '!'..'`'.
//
// Heads, where m counts refusal-trigger tokens (T1) in the comments block and
// m2 counts rejection-trigger tokens (T2):
//
//   p(first token = "I")              = sigmoid(-2 + 1.0 * m)
//   p(second token in {apologize,
//     cannot} | "I")                  = sigmoid(-1 + 0.8 * m2), split evenly
//   score(value)                      = sum of weights of the value's keywords
//                                       present in the comments
//                                       + 0.3 * (#tokens from the value's
//                                       trigger set)
//
// The model refuses iff p("I") >= 0.5. Otherwise it answers with the top-3
// values by score; at the position after "Guess:" the value distribution is
// softmax(score).
//
// Besides attribute inference the surrogate also plays the TRACE adversary
// (certainty line), the chain generator, the anonymizer (replaces keywords it
// is pointed at with their generalisation) and the LLM sanitizer (drops runs
// of three or more vocabulary symbols).

#ifndef ATTRGUARD_MODEL_SIMULATED_H_
#define ATTRGUARD_MODEL_SIMULATED_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/templates.h"
#include "attrguard/model/provider.h"
#include "attrguard/model/types.h"
#include "attrguard/status.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

struct KeywordEntry {
  std::string keyword;
  std::string attribute;
  std::string value;
  double weight = 1.0;
  // Replacement used by the surrogate anonymizer.
  std::string generalization = "something";
  bool operator==(const KeywordEntry&) const = default;
};

inline void to_json(nlohmann::json& j, const KeywordEntry& k) {
  j = nlohmann::json{{"keyword", k.keyword},
                     {"attribute", k.attribute},
                     {"value", k.value},
                     {"weight", k.weight},
                     {"generalization", k.generalization}};
}

inline void from_json(const nlohmann::json& j, KeywordEntry& k) {
  k.keyword = j.at("keyword").get<std::string>();
  k.attribute = j.at("attribute").get<std::string>();
  k.value = j.at("value").get<std::string>();
  k.weight = j.value("weight", 1.0);
  k.generalization = j.value("generalization", std::string("something"));
}

inline std::vector<std::string> PrintableSymbolVocabulary() {
  std::vector<std::string> v;
  for (char c = '!'; c <= '`'; ++c) v.emplace_back(1, c);
  return v;
}

struct SimulatedModelConfig {
  std::vector<std::string> vocabulary = PrintableSymbolVocabulary();
  std::vector<std::string> refusal_triggers = {"@", "[", "]", "^"};
  std::vector<std::string> rejection_triggers = {"#", "$", "%", "&"};
  // attribute -> value -> trigger tokens.
  std::map<std::string, std::map<std::string, std::vector<std::string>>>
      value_triggers;
  std::vector<KeywordEntry> keywords;
  std::vector<AttributeSpec> taxonomy;

  double attention_epsilon = 0.01;
  double refusal_bias = -2.0;
  double refusal_slope = 1.0;
  double rejection_bias = -1.0;
  double rejection_slope = 0.8;
  double value_trigger_weight = 0.3;
  size_t context_limit = 8192;
  size_t embedding_dim = 2048;
};

// Keyword table used when a config does not bring its own.
inline std::vector<KeywordEntry> DefaultKeywordTable() {
  return {
      {"bloke", "gender", "Male", 0.9, "person"},
      {"hubby", "gender", "Female", 0.8, "partner"},
      {"girlfriend", "gender", "Male", 0.6, "partner"},
      {"montreal", "location", "Montreal, Canada", 0.8, "a city"},
      {"zürich", "location", "Zurich, Switzerland", 0.8, "a city"},
      {"chf", "location", "Zurich, Switzerland", 0.5, "money"},
      {"retired", "age", "68", 0.7, "free"},
      {"freshman", "education", "In College", 0.7, "student"},
      {"phd", "education", "PhD", 0.8, "degree"},
      {"nurse", "occupation", "nurse", 0.7, "worker"},
      {"unemployed", "income", "No income", 0.8, "between things"},
      {"yacht", "income", "Very High (>150k USD)", 0.8, "boat"},
      {"bonus", "income", "High (60-150k USD)", 0.6, "extra"},
      {"married", "relationship_status", "Married", 0.8, "together"},
      {"divorce", "relationship_status", "Divorced", 0.8, "change"},
  };
}

// One uppercase letter per categorical option, in taxonomy order. 'A' and 'I'
// are skipped because they occur as standalone words in ordinary text.
inline std::map<std::string, std::map<std::string, std::vector<std::string>>>
AssignValueTriggers(const std::vector<AttributeSpec>& taxonomy) {
  std::map<std::string, std::map<std::string, std::vector<std::string>>> out;
  std::string letters = "BCDEFGHJKLMNOPQRSTUVWXYZ";
  size_t next = 0;
  for (const auto& a : taxonomy) {
    if (a.kind != AttributeKind::kCategorical) continue;
    for (const auto& o : a.options) {
      if (next >= letters.size()) return out;
      out[a.name][o] = {std::string(1, letters[next++])};
    }
  }
  return out;
}

inline SimulatedModelConfig DefaultSimulatedConfig(
    std::vector<AttributeSpec> taxonomy = DefaultTaxonomy()) {
  SimulatedModelConfig c;
  c.taxonomy = std::move(taxonomy);
  c.value_triggers = AssignValueTriggers(c.taxonomy);
  c.keywords = DefaultKeywordTable();
  return c;
}

// Applies JSON overrides ("keywords", "refusal_triggers", ...) on top of the
// default surrogate for `taxonomy`.
inline SimulatedModelConfig SimulatedConfigFromJson(
    const nlohmann::json& j, const std::vector<AttributeSpec>& taxonomy) {
  SimulatedModelConfig c = DefaultSimulatedConfig(taxonomy);
  if (j.is_null() || j.empty()) return c;
  if (!j.is_object()) {
    throw Error(ErrorCode::kConfigInvalid, "simulated config must be an object");
  }
  try {
    if (j.contains("vocabulary")) {
      c.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    }
    if (j.contains("refusal_triggers")) {
      c.refusal_triggers =
          j.at("refusal_triggers").get<std::vector<std::string>>();
    }
    if (j.contains("rejection_triggers")) {
      c.rejection_triggers =
          j.at("rejection_triggers").get<std::vector<std::string>>();
    }
    if (j.contains("value_triggers")) {
      c.value_triggers = j.at("value_triggers")
                             .get<std::map<std::string,
                                           std::map<std::string,
                                                    std::vector<std::string>>>>();
    }
    if (j.contains("keywords")) {
      c.keywords = j.at("keywords").get<std::vector<KeywordEntry>>();
    }
    c.attention_epsilon = j.value("attention_epsilon", c.attention_epsilon);
    c.context_limit = j.value("context_limit", c.context_limit);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string("simulated config: ") + e.what());
  }
  for (const auto& k : c.keywords) {
    if (!(k.weight > 0.0 && k.weight <= 1.0)) {
      throw Error(ErrorCode::kConfigInvalid,
                  "keyword '" + k.keyword + "' weight must be in (0, 1]");
    }
  }
  return c;
}

class SimulatedProvider : public Provider {
 public:
  explicit SimulatedProvider(SimulatedModelConfig config = DefaultSimulatedConfig(),
                             std::string name = "simulated")
      : config_(std::move(config)), name_(std::move(name)) {
    for (size_t i = 0; i < config_.vocabulary.size(); ++i) {
      vocab_index_[config_.vocabulary[i]] = static_cast<int64_t>(i);
    }
    for (const auto& k : config_.keywords) {
      keyword_index_[NormalizeForMatch(k.keyword)].push_back(&k - &config_.keywords[0]);
    }
  }

  const SimulatedModelConfig& config() const { return config_; }

  std::string Name() const override { return name_; }

  Capabilities GetCapabilities() const override {
    return {true, true, true, true, true};
  }

  int64_t TokenId(std::string_view piece) const {
    auto it = vocab_index_.find(std::string(piece));
    if (it != vocab_index_.end()) return it->second;
    return static_cast<int64_t>(config_.vocabulary.size()) +
           static_cast<int64_t>(Fnv1a64(piece) % 2147483648ULL);
  }

  TokenizedText Tokenize(std::string_view text) const override {
    if (Trim(text).empty()) {
      throw Error(ErrorCode::kEmptyInput, "cannot tokenize empty text");
    }
    TokenizedText out;
    for (const auto& w : SplitWhitespace(text)) {
      out.ids.push_back(TokenId(w.text));
      out.pieces.emplace_back(w.text);
      out.spans.push_back({w.begin, w.end});
    }
    return out;
  }

  // ---- heads -------------------------------------------------------------

  // log p(first token = "I").
  double RefusalLogProb(std::string_view body) const {
    return LogSigmoid(config_.refusal_bias +
                      config_.refusal_slope *
                          CountTokens(body, config_.refusal_triggers));
  }

  // log p(second token in {apologize, cannot} | "I").
  double RejectionLogProb(std::string_view body) const {
    return LogSigmoid(config_.rejection_bias +
                      config_.rejection_slope *
                          CountTokens(body, config_.rejection_triggers));
  }

  struct ValueScore {
    std::string value;
    double score = 0;
    // Keyword part only, without suffix triggers.
    double keyword_score = 0;
  };

  // Candidate values ranked by score, ties kept in candidate order.
  std::vector<ValueScore> RankValues(const AttributeSpec& attr,
                                     std::string_view body) const {
    std::vector<ValueScore> scores;
    auto add = [&](const std::string& v) {
      for (const auto& s : scores) {
        if (s.value == v) return;
      }
      scores.push_back({v, 0, 0});
    };
    if (attr.kind == AttributeKind::kCategorical) {
      for (const auto& o : attr.options) add(o);
    } else {
      for (const auto& k : config_.keywords) {
        if (k.attribute == attr.name) add(k.value);
      }
    }
    std::set<std::string> present = PresentKeywords(body);
    for (auto& s : scores) {
      for (const auto& k : config_.keywords) {
        if (k.attribute == attr.name && k.value == s.value &&
            present.count(NormalizeForMatch(k.keyword)) > 0) {
          s.keyword_score += k.weight;
        }
      }
      double triggers = 0;
      auto at = config_.value_triggers.find(attr.name);
      if (at != config_.value_triggers.end()) {
        auto vt = at->second.find(s.value);
        if (vt != at->second.end()) triggers = CountTokens(body, vt->second);
      }
      s.score = s.keyword_score + config_.value_trigger_weight * triggers;
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const ValueScore& a, const ValueScore& b) {
                       return a.score > b.score;
                     });
    return scores;
  }

  // 1..5, driven by the keyword evidence behind the top value.
  int Certainty(const AttributeSpec& attr, std::string_view body) const {
    auto ranked = RankValues(attr, body);
    if (ranked.empty()) return 1;
    double s = ranked.front().keyword_score;
    if (s <= 0) return 1;
    return 1 + static_cast<int>(
                   std::min(4.0, std::ceil(4.0 * s - 1e-9)));
  }

  // ---- Provider ----------------------------------------------------------

  LogProbMap NextTokenLogprobs(const LogProbQuery& query) const override {
    ValidateLogProbQuery(query);
    std::map<std::string, double> dist = NextTokenDistribution(query);
    LogProbMap out;
    for (const auto& cand : query.candidates) {
      std::string tok = FirstWord(cand);
      CandidateLogProb lp;
      lp.token_id = TokenId(tok);
      auto it = dist.find(tok);
      lp.logprob = it == dist.end() ? kLogProbFloor
                                    : std::max(kLogProbFloor, it->second);
      out[cand] = lp;
    }
    return out;
  }

  std::string Generate(std::string_view prompt, int max_tokens) const override {
    if (Trim(prompt).empty()) {
      throw Error(ErrorCode::kEmptyInput, "prompt is empty");
    }
    CheckContext(prompt);
    std::string full = Respond(prompt);
    return TruncateTokens(full, max_tokens);
  }

  AttentionResponse AttentionLastLayer(std::string_view prompt) const override {
    TokenizedText tt = Tokenize(prompt);
    CheckContext(prompt);
    AttentionResponse out;
    out.weights.reserve(tt.size());
    double total = 0;
    for (const auto& piece : tt.pieces) {
      double w = config_.attention_epsilon;
      auto it = keyword_index_.find(NormalizeForMatch(piece));
      if (it != keyword_index_.end()) {
        w = 0;
        for (size_t idx : it->second) {
          w = std::max(w, config_.keywords[idx].weight);
        }
      }
      out.weights.push_back(w);
      total += w;
    }
    for (double& w : out.weights) w /= total;
    return out;
  }

  // Bag-of-words counts hashed into a fixed number of buckets, L2-normalised.
  std::vector<double> Embed(std::string_view text) const override {
    std::vector<double> v(config_.embedding_dim, 0.0);
    for (const auto& w : SplitWhitespace(text)) {
      v[Fnv1a64(w.text) % v.size()] += 1.0;
    }
    double n = 0;
    for (double x : v) n += x * x;
    if (n > 0) {
      n = std::sqrt(n);
      for (double& x : v) x /= n;
    }
    return v;
  }

 private:
  enum class PromptKind { kInference, kChain, kAnonymize, kSanitize, kOther };

  struct InferenceView {
    const AttributeSpec* attribute = nullptr;
    std::string body;
    bool wants_certainty = false;
  };

  static PromptKind Classify(std::string_view prompt) {
    if (prompt.find(kAnonymizerMarker) != std::string_view::npos) {
      return PromptKind::kAnonymize;
    }
    if (prompt.find(kChainMarker) != std::string_view::npos) {
      return PromptKind::kChain;
    }
    if (prompt.find(kSanitizerMarker) != std::string_view::npos) {
      return PromptKind::kSanitize;
    }
    if (prompt.find(kInferenceMarker) != std::string_view::npos) {
      return PromptKind::kInference;
    }
    return PromptKind::kOther;
  }

  static std::string_view Between(std::string_view s, std::string_view start,
                                  std::string_view end) {
    size_t a = s.find(start);
    if (a == std::string_view::npos) return {};
    a += start.size();
    size_t b = end.empty() ? std::string_view::npos : s.find(end, a);
    if (b == std::string_view::npos) return s.substr(a);
    return s.substr(a, b - a);
  }

  static std::string LineValue(std::string_view s, std::string_view key,
                               size_t from = 0) {
    size_t pos = from;
    while (pos < s.size()) {
      size_t eol = s.find('\n', pos);
      std::string_view line =
          s.substr(pos, eol == std::string_view::npos ? s.npos : eol - pos);
      if (line.substr(0, key.size()) == key) {
        return std::string(Trim(line.substr(key.size())));
      }
      if (eol == std::string_view::npos) break;
      pos = eol + 1;
    }
    return {};
  }

  const AttributeSpec* FindByLabel(std::string_view label) const {
    for (const auto& a : config_.taxonomy) {
      if (a.label == label || a.name == label) return &a;
    }
    return nullptr;
  }

  std::optional<InferenceView> ParseInference(std::string_view prompt) const {
    size_t marker = prompt.find(kInferenceMarker);
    if (marker == std::string_view::npos) return std::nullopt;
    std::string_view rest = prompt.substr(marker);
    InferenceView v;
    std::string comments_start = std::string(kCommentsHeader) + "\n";
    v.body = std::string(Between(rest, comments_start, kReasonMarker));
    size_t reason = rest.find(kReasonMarker);
    v.attribute = FindByLabel(
        LineValue(rest, "Type: ", reason == std::string_view::npos ? 0 : reason));
    v.wants_certainty =
        rest.find(kCertaintyRequest) != std::string_view::npos;
    if (v.attribute == nullptr) return std::nullopt;
    return v;
  }

  double CountTokens(std::string_view body,
                     const std::vector<std::string>& set) const {
    double n = 0;
    for (const auto& w : SplitWhitespace(body)) {
      for (const auto& t : set) {
        if (w.text == t) {
          n += 1;
          break;
        }
      }
    }
    return n;
  }

  std::set<std::string> PresentKeywords(std::string_view body) const {
    std::set<std::string> out;
    for (const auto& w : SplitWhitespace(body)) {
      std::string norm = NormalizeForMatch(w.text);
      if (keyword_index_.count(norm) > 0) out.insert(norm);
    }
    return out;
  }

  // Surface of each keyword occurrence (punctuation stripped), in text order.
  std::vector<std::pair<std::string, const KeywordEntry*>> KeywordMentions(
      std::string_view body, const AttributeSpec* attr) const {
    std::vector<std::pair<std::string, const KeywordEntry*>> out;
    std::set<std::string> seen;
    for (const auto& w : SplitWhitespace(body)) {
      std::string norm = NormalizeForMatch(w.text);
      auto it = keyword_index_.find(norm);
      if (it == keyword_index_.end() || seen.count(norm) > 0) continue;
      for (size_t idx : it->second) {
        const KeywordEntry& k = config_.keywords[idx];
        if (attr == nullptr || k.attribute == attr->name) {
          out.emplace_back(StripPunct(w.text), &k);
          seen.insert(norm);
          break;
        }
      }
    }
    return out;
  }

  static std::string StripPunct(std::string_view w) {
    auto cps = DecodeUtf8(w);
    size_t a = 0, b = cps.size();
    while (a < b && IsPunct(cps[a].value)) ++a;
    while (b > a && IsPunct(cps[b - 1].value)) --b;
    if (a >= b) return {};
    return std::string(w.substr(cps[a].begin, cps[b - 1].end - cps[a].begin));
  }

  void CheckContext(std::string_view prompt) const {
    if (SplitWhitespace(prompt).size() > config_.context_limit) {
      throw Error(ErrorCode::kContextLengthExceeded,
                  "prompt exceeds the simulated context limit");
    }
  }

  static std::string TruncateTokens(const std::string& s, int max_tokens) {
    auto words = SplitWhitespace(s);
    if (max_tokens < 0 || words.size() <= static_cast<size_t>(max_tokens)) {
      return s;
    }
    if (max_tokens == 0) return {};
    return s.substr(0, words[max_tokens - 1].end);
  }

  std::string Respond(std::string_view prompt) const {
    switch (Classify(prompt)) {
      case PromptKind::kInference:
        return RespondInference(prompt);
      case PromptKind::kChain:
        return RespondChain(prompt);
      case PromptKind::kAnonymize:
        return RespondAnonymize(prompt);
      case PromptKind::kSanitize:
        return RespondSanitize(prompt);
      case PromptKind::kOther:
        break;
    }
    return "I do not have enough information to respond.";
  }

  std::string RespondInference(std::string_view prompt) const {
    auto view = ParseInference(prompt);
    if (!view) return "I could not find the attribute to guess.";
    if (RefusalLogProb(view->body) >= std::log(0.5)) {
      return "I cannot provide information that could be used to identify a "
             "private citizen.";
    }
    const AttributeSpec& attr = *view->attribute;
    auto ranked = RankValues(attr, view->body);
    auto mentions = KeywordMentions(view->body, &attr);
    std::string inference;
    if (mentions.empty()) {
      inference = "The comments contain no specific cues about the author's " +
                  attr.label + ".";
    } else {
      std::vector<std::string> parts;
      for (const auto& [surface, k] : mentions) {
        parts.push_back("\"" + surface + "\" (" + k->value + ")");
      }
      inference = "The comments mention " + Join(parts, ", ") + ".";
    }
    std::vector<std::string> guesses;
    for (size_t i = 0; i < ranked.size() && i < 3; ++i) {
      guesses.push_back(ranked[i].value);
    }
    if (guesses.empty()) guesses.push_back("unknown");
    std::string out = "Type: " + attr.label + "\nInference: " + inference + "\n";
    if (view->wants_certainty) {
      out += "Certainty: " + std::to_string(Certainty(attr, view->body)) + "\n";
    }
    out += "Guess: " + Join(guesses, "; ");
    return out;
  }

  std::string RespondChain(std::string_view prompt) const {
    std::string_view comments = Between(prompt, "Comments:\n", "\n\nTarget Attribute:");
    const AttributeSpec* attr = FindByLabel(LineValue(prompt, "Target Attribute: "));
    auto mentions = KeywordMentions(comments, attr);
    if (mentions.empty() || attr == nullptr) {
      return "The comments do not contain specific cues that support the "
             "guess.";
    }
    std::string out = "Inference Chain:\n";
    for (size_t i = 0; i < mentions.size(); ++i) {
      const auto& [surface, k] = mentions[i];
      out += "Step " + std::to_string(i + 1) + ": The word \"" + surface +
             "\" is commonly associated with " + attr->label + " " + k->value +
             ".\n";
      out += "Evidence: \"" + surface + "\" appears in the comments and leaks "
             "the author's " + attr->label + ".\n";
    }
    return std::string(TrimRight(out));
  }

  std::string RespondAnonymize(std::string_view prompt) const {
    std::string text(Between(prompt, "Comments:\n",
                             "\n\nAttribute inference for comments:\n"));
    std::string_view words = Between(
        prompt, "Potentially identifying words in Comments to anonymize:\n",
        "\n\nReasoning Chain:\n");
    std::string_view chain = Between(
        prompt, "Reasoning Chain:\n", "\n\nThe reasoning chain above explains");
    std::set<std::string> targets;
    for (const auto& w : Split(words, ',')) {
      std::string norm = NormalizeForMatch(w);
      if (keyword_index_.count(norm) > 0) targets.insert(norm);
    }
    // Quoted evidence in the chain.
    size_t pos = 0;
    while ((pos = chain.find('"', pos)) != std::string_view::npos) {
      size_t close = chain.find('"', pos + 1);
      if (close == std::string_view::npos) break;
      for (const auto& w :
           SplitWhitespace(chain.substr(pos + 1, close - pos - 1))) {
        std::string norm = NormalizeForMatch(w.text);
        if (keyword_index_.count(norm) > 0) targets.insert(norm);
      }
      pos = close + 1;
    }
    std::vector<std::string> changed;
    std::string out;
    size_t last = 0;
    for (const auto& w : SplitWhitespace(text)) {
      std::string norm = NormalizeForMatch(w.text);
      if (targets.count(norm) == 0) continue;
      const KeywordEntry& k = config_.keywords[keyword_index_.at(norm).front()];
      std::string core = StripPunct(w.text);
      size_t core_at = std::string_view(w.text).find(core);
      out.append(text, last, w.begin + core_at - last);
      out.append(k.generalization);
      last = w.begin + core_at + core.size();
      changed.push_back(core + " -> " + k.generalization);
    }
    out.append(text, last, std::string::npos);
    if (changed.empty()) {
      return "No identifying words need to change.\n#\n" + text;
    }
    return "I will generalize: " + Join(changed, ", ") + ".\n#\n" + out;
  }

  std::string RespondSanitize(std::string_view prompt) const {
    std::string_view text = Between(prompt, "Text:\n", "");
    std::vector<std::string> lines;
    for (const auto& line : Split(text, '\n')) {
      auto words = SplitWhitespace(line);
      std::vector<bool> drop(words.size(), false);
      size_t i = 0;
      while (i < words.size()) {
        size_t j = i;
        while (j < words.size() && vocab_index_.count(std::string(words[j].text))) {
          ++j;
        }
        if (j - i >= 3) {
          for (size_t k = i; k < j; ++k) drop[k] = true;
        }
        i = std::max(j, i + 1);
      }
      std::vector<std::string> kept;
      for (size_t k = 0; k < words.size(); ++k) {
        if (!drop[k]) kept.emplace_back(words[k].text);
      }
      lines.push_back(Join(kept, " "));
    }
    return Join(lines, "\n");
  }

  std::map<std::string, double> NextTokenDistribution(
      const LogProbQuery& q) const {
    std::map<std::string, double> dist;
    std::string_view prefix = TrimRight(q.forced_prefix);
    auto view = Classify(q.prompt) == PromptKind::kInference
                    ? ParseInference(q.prompt)
                    : std::nullopt;
    if (view) {
      if (Trim(prefix).empty()) {
        double lp = RefusalLogProb(view->body);
        dist["I"] = lp;
        dist["Type:"] = std::log1p(-std::exp(lp));
        return dist;
      }
      if (Trim(prefix) == "I") {
        double lq = RejectionLogProb(view->body);
        dist["apologize"] = lq - std::log(2.0);
        dist["cannot"] = lq - std::log(2.0);
        dist["will"] = std::log1p(-std::exp(lq));
        return dist;
      }
      if (prefix.size() >= 6 && prefix.substr(prefix.size() - 6) == "Guess:") {
        auto ranked = RankValues(*view->attribute, view->body);
        double mx = -1e300;
        for (const auto& r : ranked) mx = std::max(mx, r.score);
        double z = 0;
        for (const auto& r : ranked) z += std::exp(r.score - mx);
        std::map<std::string, double> prob;
        for (const auto& r : ranked) {
          prob[FirstWord(r.value)] += std::exp(r.score - mx) / z;
        }
        for (const auto& [tok, p] : prob) dist[tok] = std::log(p);
        return dist;
      }
    }
    // Any other prefix: the next token of the greedy response, if the prefix
    // agrees with it.
    std::string response = Respond(q.prompt);
    if (response.compare(0, q.forced_prefix.size(), q.forced_prefix) == 0) {
      std::string next = FirstWord(std::string_view(response).substr(
          q.forced_prefix.size()));
      if (!next.empty()) dist[next] = 0.0;
    }
    return dist;
  }

  SimulatedModelConfig config_;
  std::string name_;
  std::map<std::string, int64_t> vocab_index_;
  std::map<std::string, std::vector<size_t>> keyword_index_;
};

}  // namespace attrguard

#endif  // ATTRGUARD_MODEL_SIMULATED_H_
