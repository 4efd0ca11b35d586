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

#ifndef ATTRGUARD_UTIL_RANDOM_H_
#define ATTRGUARD_UTIL_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace attrguard {

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the index-th independent stream derived from one run seed.
inline uint64_t DeriveSeed(uint64_t base, uint64_t index) {
  return SplitMix64(base ^ SplitMix64(index + 1));
}

// mt19937_64 with a portable bounded draw. std::uniform_int_distribution is
// implementation-defined, which would break cross-platform replay of runs.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(SplitMix64(seed)) {}

  uint64_t Next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  size_t UniformIndex(size_t n) {
    const uint64_t range = static_cast<uint64_t>(n);
    const uint64_t limit =
        std::numeric_limits<uint64_t>::max() -
        std::numeric_limits<uint64_t>::max() % range;
    uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<size_t>(v % range);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace attrguard

#endif  // ATTRGUARD_UTIL_RANDOM_H_
