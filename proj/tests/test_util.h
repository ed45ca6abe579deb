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

// Shared helpers for the unit tests.

#ifndef MEMLAB_TESTS_TEST_UTIL_H_
#define MEMLAB_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "memlab/model.h"
#include "memlab/train.h"

namespace memlab::testing {

inline ModelConfig SmallConfig(int vocab, int hidden, double dropout = 0.0,
                               std::uint64_t seed = 1, double init_scale = 0.5) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.hidden_size = hidden;
  c.dropout = dropout;
  c.init_scale = init_scale;
  c.seed = seed;
  return c;
}

inline EncodedCorpus RandomSequences(int count, int vocab, int min_len, int max_len,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(min_len, max_len), tok(0, vocab - 1);
  EncodedCorpus out(count);
  for (auto& s : out) {
    s.resize(len(rng));
    for (auto& t : s) t = tok(rng);
  }
  return out;
}

// Token-mean next-token cross-entropy of a batch, computed through the
// public forward and loss entry points.
template <typename S>
double BatchLoss(const ModelParams<S>& p, const SequenceBatch& b, Mode mode,
                 std::uint64_t dropout_seed) {
  auto fr = Forward(p, b, mode, dropout_seed);
  const LossPlan plan = MakeLossPlan(b.sequences, LossReduction::kTokenMean);
  return CrossEntropy<S>(fr.logits, plan.targets, plan.weights).loss;
}

inline double RelErr(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("memlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace memlab::testing

#endif  // MEMLAB_TESTS_TEST_UTIL_H_
