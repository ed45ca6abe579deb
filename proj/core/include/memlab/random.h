//
// Copyright 2026 The Memlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef MEMLAB_RANDOM_H_
#define MEMLAB_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace memlab {

// All stochastic components draw from std::mt19937_64 engines seeded through
// DeriveSeed, so every stream is a pure function of (root seed, purpose,
// index). Results are reproducible on a fixed platform and standard library.
using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t HashString(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t a) {
  return Mix64(seed ^ Mix64(a));
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b) {
  return DeriveSeed(DeriveSeed(seed, a), b);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view tag) {
  return DeriveSeed(seed, HashString(tag));
}

// Stream purposes. Distinct constants keep streams independent even when the
// same root seed is reused across stages.
enum class Stream : std::uint64_t {
  kSynthetic = 1,
  kSplit = 2,
  kInject = 3,
  kInit = 4,
  kShuffle = 5,
  kDropout = 6,
  kDpSample = 7,
  kDpNoise = 8,
  kImportance = 9,
};

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, Stream s) {
  return DeriveSeed(seed, static_cast<std::uint64_t>(s));
}

}  // namespace memlab

#endif  // MEMLAB_RANDOM_H_
