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

// Privacy vocabulary: the K words of a text that receive the most last-layer
// attention when the attacker is asked about an attribute.

#ifndef ATTRGUARD_TRACE_VOCABULARY_H_
#define ATTRGUARD_TRACE_VOCABULARY_H_

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/templates.h"
#include "attrguard/model/provider.h"
#include "attrguard/trace/words.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

inline std::vector<std::string> DefaultStopwords() {
  return {"a",     "an",    "the",   "and",  "or",    "but",  "if",
          "of",    "to",    "in",    "on",   "at",    "by",   "for",
          "with",  "from",  "as",    "is",   "are",   "was",  "were",
          "be",    "been",  "am",    "it",   "its",   "this", "that",
          "these", "those", "i",     "me",   "my",    "you",  "your",
          "he",    "she",   "we",    "they", "them",  "our",  "so",
          "not",   "no",    "do",    "does", "did",   "have", "has",
          "had"};
}

struct VocabularyOptions {
  size_t k = 10;
  bool stopword_filter = true;
  std::vector<std::string> stopwords = DefaultStopwords();
  // Appended to the text on its own line before reading attention.
  std::string query_template = "What is the author's {attribute}?";
};

inline void to_json(nlohmann::json& j, const VocabularyOptions& o) {
  j = nlohmann::json{{"k", o.k},
                     {"stopword_filter", o.stopword_filter},
                     {"stopwords", o.stopwords},
                     {"query_template", o.query_template}};
}

inline void from_json(const nlohmann::json& j, VocabularyOptions& o) {
  VocabularyOptions d;
  o.k = j.value("k", d.k);
  o.stopword_filter = j.value("stopword_filter", d.stopword_filter);
  o.stopwords = j.value("stopwords", d.stopwords);
  o.query_template = j.value("query_template", d.query_template);
}

struct VocabularyEntry {
  std::string word;
  double score = 0.0;
  // Byte offset of the occurrence that produced the score.
  size_t position = 0;
  bool operator==(const VocabularyEntry&) const = default;
};

struct PrivacyVocabulary {
  std::string attribute;
  size_t k = 0;
  std::vector<VocabularyEntry> entries;

  std::vector<std::string> Words() const {
    std::vector<std::string> out;
    for (const auto& e : entries) out.push_back(e.word);
    return out;
  }
  bool operator==(const PrivacyVocabulary&) const = default;
};

inline void to_json(nlohmann::json& j, const PrivacyVocabulary& v) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : v.entries) {
    entries.push_back({{"word", e.word}, {"score", e.score}, {"position", e.position}});
  }
  j = nlohmann::json{{"attribute", v.attribute}, {"k", v.k}, {"entries", entries}};
}

inline void from_json(const nlohmann::json& j, PrivacyVocabulary& v) {
  v.attribute = j.value("attribute", std::string());
  v.k = j.value("k", size_t{0});
  v.entries.clear();
  for (const auto& e : j.value("entries", nlohmann::json::array())) {
    v.entries.push_back({e.at("word").get<std::string>(),
                         e.at("score").get<double>(),
                         e.at("position").get<size_t>()});
  }
}

// Orders scored words by score, ties by earlier position, keeping the best
// occurrence of each surface word, and returns the first k.
inline std::vector<VocabularyEntry> RankWords(const std::vector<WordScore>& words,
                                              size_t k) {
  std::map<std::string, VocabularyEntry> best;
  for (const auto& w : words) {
    auto it = best.find(w.word);
    if (it == best.end()) {
      best[w.word] = {w.word, w.score, w.begin};
    } else if (w.score > it->second.score ||
               (w.score == it->second.score && w.begin < it->second.position)) {
      it->second.score = w.score;
      it->second.position = w.begin;
    }
  }
  std::vector<VocabularyEntry> ranked;
  ranked.reserve(best.size());
  for (auto& [word, e] : best) ranked.push_back(std::move(e));
  std::sort(ranked.begin(), ranked.end(),
            [](const VocabularyEntry& a, const VocabularyEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.position < b.position;
            });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

inline std::string AttentionPrompt(std::string_view text,
                                   const AttributeSpec& attribute,
                                   const VocabularyOptions& options) {
  return std::string(text) + "\n" +
         RenderTemplate(options.query_template,
                        {{"attribute", attribute.label}});
}

// Word scores for the words of `text` (the query words are dropped), before
// stopword filtering and ranking.
inline WordAggregation ScoreTextWords(std::string_view text,
                                      const AttributeSpec& attribute,
                                      const Provider& provider,
                                      const VocabularyOptions& options) {
  RequireCapability(provider, provider.GetCapabilities().attention,
                    ErrorCode::kAttentionUnsupported, "attention");
  std::string prompt = AttentionPrompt(text, attribute, options);
  TokenizedText tokens = provider.Tokenize(prompt);
  AttentionResponse attention = provider.AttentionLastLayer(prompt);
  WordAggregation agg = AggregateWordScores(tokens, attention, prompt);
  std::erase_if(agg.words,
                [&](const WordScore& w) { return w.end > text.size(); });
  return agg;
}

inline PrivacyVocabulary ExtractPrivacyVocabulary(
    std::string_view text, const AttributeSpec& attribute,
    const Provider& provider, const VocabularyOptions& options = {}) {
  WordAggregation agg = ScoreTextWords(text, attribute, provider, options);
  if (options.stopword_filter) {
    std::set<std::string> stop;
    for (const auto& s : options.stopwords) stop.insert(AsciiLower(s));
    std::erase_if(agg.words, [&](const WordScore& w) {
      return stop.count(AsciiLower(w.word)) > 0;
    });
  }
  PrivacyVocabulary v;
  v.attribute = attribute.name;
  v.k = options.k;
  v.entries = RankWords(agg.words, options.k);
  return v;
}

}  // namespace attrguard

#endif  // ATTRGUARD_TRACE_VOCABULARY_H_
