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

// Suffixes over an explicit search vocabulary, their placement in a text,
// and the RandomReplace mutation.

#ifndef ATTRGUARD_SEARCH_SUFFIX_H_
#define ATTRGUARD_SEARCH_SUFFIX_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "attrguard/status.h"
#include "attrguard/util/random.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

// Token ids index into the search vocabulary; the surface is the tokens
// joined by single spaces.
struct Suffix {
  std::vector<size_t> tokens;
  std::string surface;
  bool operator==(const Suffix&) const = default;
};

inline Suffix MakeSuffix(std::vector<size_t> tokens,
                         const std::vector<std::string>& vocabulary) {
  Suffix s;
  std::vector<std::string> pieces;
  pieces.reserve(tokens.size());
  for (size_t t : tokens) {
    if (t >= vocabulary.size()) {
      throw Error(ErrorCode::kInvalidArgument, "suffix token id out of range");
    }
    pieces.push_back(vocabulary[t]);
  }
  s.tokens = std::move(tokens);
  s.surface = Join(pieces, " ");
  return s;
}

// Parses a whitespace-separated suffix; every piece must be in `vocabulary`.
inline Suffix ParseSuffix(std::string_view surface,
                          const std::vector<std::string>& vocabulary) {
  std::map<std::string, size_t, std::less<>> index;
  for (size_t i = 0; i < vocabulary.size(); ++i) index.emplace(vocabulary[i], i);
  std::vector<size_t> tokens;
  for (const auto& w : SplitWhitespace(surface)) {
    auto it = index.find(w.text);
    if (it == index.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "suffix piece '" + std::string(w.text) +
                      "' is not in the search vocabulary");
    }
    tokens.push_back(it->second);
  }
  if (tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "suffix is empty");
  }
  return MakeSuffix(std::move(tokens), vocabulary);
}

// 48 tokens, none of which is a trigger of the surrogate model.
inline std::string DefaultInitSuffix() {
  std::vector<std::string> pieces(48, "!");
  return Join(pieces, " ");
}

enum class Placement { kPrefix, kInfix, kSuffix };

NLOHMANN_JSON_SERIALIZE_ENUM(Placement, {{Placement::kPrefix, "prefix"},
                                         {Placement::kInfix, "infix"},
                                         {Placement::kSuffix, "suffix"}})

// Byte offset of the whitespace character closest to the middle of `text`,
// preferring the earlier one on ties; npos if there is none.
inline size_t InfixPosition(std::string_view text) {
  const double mid = static_cast<double>(text.size()) / 2.0;
  size_t best = std::string_view::npos;
  double best_dist = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    if (!IsAsciiSpace(text[i])) continue;
    double d = std::abs(static_cast<double>(i) - mid);
    if (best == std::string_view::npos || d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

inline std::string ApplyPerturbation(std::string_view text,
                                     std::string_view surface,
                                     Placement placement) {
  std::string t(text);
  std::string s(surface);
  switch (placement) {
    case Placement::kPrefix:
      return s + " " + t;
    case Placement::kSuffix:
      return t + " " + s;
    case Placement::kInfix: {
      size_t pos = InfixPosition(text);
      if (pos == std::string_view::npos) return t + " " + s;
      return t.substr(0, pos) + " " + s + t.substr(pos);
    }
  }
  return t;
}

// Inverse of ApplyPerturbation for a known surface.
inline std::string RemovePerturbation(std::string_view defended,
                                      std::string_view surface,
                                      Placement placement,
                                      std::string_view original_hint = {}) {
  std::string d(defended);
  std::string s(surface);
  switch (placement) {
    case Placement::kPrefix:
      return d.substr(s.size() + 1);
    case Placement::kSuffix:
      return d.substr(0, d.size() - s.size() - 1);
    case Placement::kInfix: {
      size_t pos = original_hint.empty() ? std::string::npos
                                         : InfixPosition(original_hint);
      if (pos == std::string::npos) return d.substr(0, d.size() - s.size() - 1);
      return d.substr(0, pos) + d.substr(pos + s.size() + 1);
    }
  }
  return d;
}

// Replaces min(span, length) contiguous tokens starting at a uniform random
// position with uniform draws from the vocabulary.
inline Suffix RandomReplace(const Suffix& suffix, size_t span,
                            const std::vector<std::string>& vocabulary,
                            Rng& rng) {
  if (vocabulary.empty()) {
    throw Error(ErrorCode::kEmptyVocabulary, "search vocabulary is empty");
  }
  if (suffix.tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "suffix is empty");
  }
  if (span < 1) {
    throw Error(ErrorCode::kInvalidArgument, "span must be >= 1");
  }
  const size_t len = suffix.tokens.size();
  const size_t count = std::min(span, len);
  const size_t start = rng.UniformIndex(len - count + 1);
  std::vector<size_t> tokens = suffix.tokens;
  for (size_t i = 0; i < count; ++i) {
    tokens[start + i] = rng.UniformIndex(vocabulary.size());
  }
  return MakeSuffix(std::move(tokens), vocabulary);
}

}  // namespace attrguard

#endif  // ATTRGUARD_SEARCH_SUFFIX_H_
