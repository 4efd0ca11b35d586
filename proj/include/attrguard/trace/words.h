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

// Word segmentation and token-to-word attention aggregation.
//
// A word is a maximal run of code points that are neither whitespace nor
// punctuation; an apostrophe or hyphen between two word characters stays
// inside the word. A token belongs to every word its span overlaps. A token
// overlapping k > 1 words gives each of them 1/k of its weight, so the word
// scores plus the residue of tokens that touch no word (pure punctuation)
// always add up to the token total.

#ifndef ATTRGUARD_TRACE_WORDS_H_
#define ATTRGUARD_TRACE_WORDS_H_

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "attrguard/model/types.h"
#include "attrguard/status.h"
#include "attrguard/util/strings.h"

namespace attrguard {

struct Word {
  std::string text;
  // Byte offsets, half open.
  size_t begin = 0;
  size_t end = 0;
};

struct WordScore {
  std::string word;
  size_t begin = 0;
  size_t end = 0;
  double score = 0.0;
};

struct WordAggregation {
  std::vector<WordScore> words;
  // Attention of tokens that overlap no word.
  double residue = 0.0;
  // Tokens whose span overlapped more than one word.
  size_t split_tokens = 0;
};

namespace internal {

inline bool IsWordChar(char32_t c) { return !IsSpace(c) && !IsPunct(c); }

inline bool IsInnerJoiner(char32_t c) {
  return c == '\'' || c == '-' || c == 0x2019 || c == 0x2010 || c == 0x2011;
}

}  // namespace internal

inline std::vector<Word> SegmentWords(std::string_view text) {
  std::vector<Word> out;
  auto cps = DecodeUtf8(text);
  size_t i = 0;
  while (i < cps.size()) {
    if (!internal::IsWordChar(cps[i].value)) {
      ++i;
      continue;
    }
    size_t start = i;
    while (i < cps.size()) {
      if (internal::IsWordChar(cps[i].value)) {
        ++i;
      } else if (internal::IsInnerJoiner(cps[i].value) && i + 1 < cps.size() &&
                 internal::IsWordChar(cps[i + 1].value)) {
        i += 2;
      } else {
        break;
      }
    }
    size_t b = cps[start].begin;
    size_t e = cps[i - 1].end;
    out.push_back({std::string(text.substr(b, e - b)), b, e});
  }
  return out;
}

inline WordAggregation AggregateWordScores(const TokenizedText& tokens,
                                           const AttentionResponse& attention,
                                           std::string_view text) {
  if (attention.weights.size() != tokens.size() ||
      tokens.spans.size() != tokens.size()) {
    throw Error(ErrorCode::kAlignmentMismatch,
                "attention has " + std::to_string(attention.weights.size()) +
                    " weights for " + std::to_string(tokens.size()) +
                    " tokens");
  }
  std::vector<Word> words = SegmentWords(text);
  WordAggregation out;
  out.words.reserve(words.size());
  for (const auto& w : words) out.words.push_back({w.text, w.begin, w.end, 0.0});

  for (size_t t = 0; t < tokens.size(); ++t) {
    const TokenSpan& span = tokens.spans[t];
    if (span.begin > span.end || span.end > text.size()) {
      throw Error(ErrorCode::kAlignmentMismatch,
                  "token " + std::to_string(t) + " lies outside the text");
    }
    double w = attention.weights[t];
    // First word ending after the token starts.
    auto first = std::upper_bound(
        out.words.begin(), out.words.end(), span.begin,
        [](size_t pos, const WordScore& ws) { return pos < ws.end; });
    auto last = first;
    while (last != out.words.end() && last->begin < span.end) ++last;
    size_t k = static_cast<size_t>(last - first);
    if (k == 0 || span.begin == span.end) {
      out.residue += w;
      continue;
    }
    if (k > 1) ++out.split_tokens;
    double share = w / static_cast<double>(k);
    for (auto it = first; it != last; ++it) it->score += share;
  }
  return out;
}

}  // namespace attrguard

#endif  // ATTRGUARD_TRACE_WORDS_H_
