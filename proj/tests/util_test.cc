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

#include <atomic>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "attrguard/status.h"
#include "attrguard/util/parallel.h"
#include "attrguard/util/random.h"
#include "attrguard/util/strings.h"
#include "gtest/gtest.h"

namespace attrguard {
namespace {

TEST(StringsTest, TrimAndLower) {
  EXPECT_EQ(Trim("  a b \n"), "a b");
  EXPECT_EQ(Trim(""), "");
  EXPECT_EQ(AsciiLower("MiXeD Ü"), "mixed Ü");
}

TEST(StringsTest, SplitKeepsEmptyFields) {
  EXPECT_EQ(Split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(Split("", ','), (std::vector<std::string>{""}));
}

TEST(StringsTest, SplitWhitespaceOffsets) {
  auto w = SplitWhitespace("  ab\tc  d");
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0].text, "ab");
  EXPECT_EQ(w[0].begin, 2u);
  EXPECT_EQ(w[0].end, 4u);
  EXPECT_EQ(w[2].text, "d");
  EXPECT_EQ(w[2].begin, 8u);
  EXPECT_EQ(FirstWord("  Male and more"), "Male");
  EXPECT_EQ(FirstWord("   "), "");
}

TEST(StringsTest, Utf8Decoding) {
  std::string s = "Zürich €";
  EXPECT_EQ(CountCodePoints(s), 8u);
  EXPECT_EQ(CodePointToByteOffset(s, 2), 3u);
  EXPECT_EQ(CodePointToByteOffset(s, 8), s.size());
  auto cps = DecodeUtf8(s);
  EXPECT_EQ(cps[1].value, U'ü');
  EXPECT_EQ(cps[7].value, U'€');
  // Invalid continuation byte decodes to U+FFFD and consumes one byte.
  auto bad = DecodeUtf8(std::string("a\xC3") + "b");
  ASSERT_EQ(bad.size(), 3u);
  EXPECT_EQ(bad[1].value, 0xFFFDu);
}

TEST(StringsTest, NormalizeForMatch) {
  EXPECT_EQ(NormalizeForMatch("  Zürich,   Switzerland! "), "zürich switzerland");
  EXPECT_EQ(NormalizeForMatch("bloke,"), "bloke");
  EXPECT_EQ(NormalizeForMatch("..."), "");
}

TEST(StringsTest, FnvKnownVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(HexDigest(0xabcULL), "0000000000000abc");
}

TEST(StringsTest, ReplaceAllDoesNotRescan) {
  EXPECT_EQ(ReplaceAll("aaa", "a", "aa"), "aaaaaa");
  EXPECT_EQ(ReplaceAll("abc", "", "x"), "abc");
}

TEST(RandomTest, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    uint64_t x = a.Next();
    EXPECT_EQ(x, b.Next());
    differs = differs || x != c.Next();
  }
  EXPECT_TRUE(differs);
}

TEST(RandomTest, UniformIndexInRangeAndCoversAll) {
  Rng rng(7);
  std::set<size_t> seen;
  for (int i = 0; i < 2000; ++i) {
    size_t v = rng.UniformIndex(6);
    ASSERT_LT(v, 6u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 6u);
  EXPECT_EQ(rng.UniformIndex(1), 0u);
}

TEST(RandomTest, DerivedSeedsAreDistinct) {
  std::set<uint64_t> seeds;
  for (uint64_t i = 0; i < 1000; ++i) seeds.insert(DeriveSeed(5, i));
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_NE(DeriveSeed(5, 0), DeriveSeed(6, 0));
}

TEST(ParallelTest, EverySlotWrittenOnce) {
  for (int jobs : {1, 3, 8}) {
    std::vector<int> out(257, 0);
    ParallelFor(out.size(), jobs, [&](size_t i) { out[i] += static_cast<int>(i); });
    for (size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i));
  }
}

TEST(ParallelTest, RethrowsAfterAllWorkersFinish) {
  std::atomic<int> ran{0};
  EXPECT_THROW(ParallelFor(50, 4,
                           [&](size_t i) {
                             ++ran;
                             if (i == 10) throw std::runtime_error("boom");
                           }),
               std::runtime_error);
  EXPECT_EQ(ran.load(), 50);
}

TEST(StatusTest, ErrorCarriesCodeAndPrefix) {
  Error e(ErrorCode::kRunNotFound, "run 'x' not found");
  EXPECT_EQ(e.code(), ErrorCode::kRunNotFound);
  EXPECT_EQ(e.message(), "run 'x' not found");
  EXPECT_STREQ(e.what(), "run-not-found: run 'x' not found");
  EXPECT_TRUE(IsProviderError(ErrorCode::kLogprobsUnsupported));
  EXPECT_FALSE(IsProviderError(ErrorCode::kParseError));
}

}  // namespace
}  // namespace attrguard
