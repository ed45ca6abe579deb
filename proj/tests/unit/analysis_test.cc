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

#include "memlab/analysis.h"

#include <random>

#include <gtest/gtest.h>

#include "memlab/error.h"

namespace memlab {
namespace {

// A full-factorial synthetic grid whose target is a function of the given
// columns only.
std::vector<ResultRow> Grid(const std::function<int(const ResultRow&)>& target,
                            std::uint64_t noise_seed = 0, double noise = 0.0) {
  std::vector<ResultRow> rows;
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> eps(0.0, noise);
  int id = 0;
  for (int h : {256, 384, 512})
    for (int k : {32, 64, 128, 256})
      for (double l2 : {0.0, 1e-6})
        for (int v : {15000, 25000}) {
          ResultRow r;
          r.id = "s" + std::to_string(id++);
          r.hidden_size = h;
          r.insertions = k;
          r.l2_lambda = l2;
          r.vocab_size = v;
          r.dropout = 0.1;
          r.canaries_greedy = target(r) + static_cast<int>(std::lround(noise > 0 ? eps(rng) : 0));
          rows.push_back(r);
        }
  return rows;
}

double Score(const ImportanceResult& r, std::string_view feature) {
  for (const auto& f : r.features)
    if (f.feature == feature) return f.prediction_shift;
  return -1;
}

TEST(ImportanceTest, TargetOfInsertionsOnlyRanksInsertionsFirst) {
  const auto rows = Grid([](const ResultRow& r) { return r.insertions / 8; });
  const ImportanceResult res = PermutationImportance(rows);
  ASSERT_EQ(res.features.size(), 6u);
  EXPECT_EQ(res.features[0].feature, "insertions");
  EXPECT_GT(res.features[0].error_increase, 0.0);
  EXPECT_NEAR(Score(res, "hidden_size"), 0.0, 1e-9);
  EXPECT_NEAR(Score(res, "vocab_size"), 0.0, 1e-9);
  EXPECT_EQ(res.rows_used, 48);
}

TEST(ImportanceTest, IndependentFeatureStaysWithinNoise) {
  const auto rows =
      Grid([](const ResultRow& r) { return r.insertions / 8 + *r.hidden_size / 32; }, 4, 1.0);
  const ImportanceResult res = PermutationImportance(rows);
  EXPECT_EQ(res.features[0].feature, "insertions");
  EXPECT_EQ(res.features[1].feature, "hidden_size");
  // Vocabulary size is independent of the target: only noise is fitted.
  EXPECT_LT(Score(res, "vocab_size"), 0.1 * Score(res, "hidden_size"));
}

TEST(ImportanceTest, ConstantTargetGivesZerosAndWarning) {
  const ImportanceResult res = PermutationImportance(Grid([](const ResultRow&) { return 7; }));
  for (const auto& f : res.features) {
    EXPECT_EQ(f.prediction_shift, 0.0);
    EXPECT_EQ(f.error_increase, 0.0);
  }
  EXPECT_FALSE(res.warnings.empty());
}

TEST(ImportanceTest, NeedsTenRows) {
  auto rows = Grid([](const ResultRow& r) { return r.insertions; });
  rows.resize(9);
  EXPECT_THROW(PermutationImportance(rows), DataError);
}

TEST(ImportanceTest, SkipsRowsWithMissingFeatures) {
  auto rows = Grid([](const ResultRow& r) { return r.insertions; });
  rows[0].hidden_size.reset();
  const ImportanceResult res = PermutationImportance(rows);
  EXPECT_EQ(res.rows_used, 47);
  EXPECT_FALSE(res.warnings.empty());
}

TEST(ImportanceTest, DeterministicPerSeed) {
  const auto rows = Grid([](const ResultRow& r) { return r.insertions / 8 + *r.hidden_size / 64; },
                         1, 2.0);
  ImportanceOptions o;
  o.seed = 3;
  EXPECT_EQ(PermutationImportance(rows, o).ToJson(), PermutationImportance(rows, o).ToJson());
}

TEST(ImportanceTest, ReferenceLstmRows) {
  const ImportanceResult res = PermutationImportance(ReferenceLstmRows());
  EXPECT_EQ(res.rows_used, 120);
  EXPECT_EQ(res.features[0].feature, "insertions");
  EXPECT_EQ(res.features[1].feature, "hidden_size");
  // Insertions also dominate by error increase.
  for (const auto& f : res.features)
    if (f.feature != "insertions") EXPECT_GT(res.features[0].error_increase, f.error_increase);
}

}  // namespace
}  // namespace memlab
