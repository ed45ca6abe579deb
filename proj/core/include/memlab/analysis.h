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

#ifndef MEMLAB_ANALYSIS_H_
#define MEMLAB_ANALYSIS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "memlab/results.h"

namespace memlab {

// Predictor columns used by the importance analysis.
inline constexpr std::string_view kImportanceFeatures[] = {
    "insertions", "hidden_size", "l2_lambda", "vocab_size", "dropout", "scrub"};

struct ImportanceOptions {
  std::string target = "canaries_greedy";  // any numeric results column
  int repeats = 100;
  std::uint64_t seed = 0;
};

struct FeatureImportance {
  std::string feature;
  // Mean absolute change of the fitted prediction when the column is
  // permuted. Used for ranking.
  double prediction_shift = 0.0;
  // Mean increase of squared prediction error when the column is permuted.
  double error_increase = 0.0;
};

struct ImportanceResult {
  // Sorted by prediction_shift, descending (ties by feature name).
  std::vector<FeatureImportance> features;
  double baseline_mse = 0.0;
  double target_variance = 0.0;
  int rows_used = 0;
  std::vector<std::string> warnings;

  std::string ToJson() const;
};

// Fits ordinary least squares on standardized features, then permutes each
// feature column `repeats` times (seeded) and averages both scores. Rows
// lacking a feature or the target are skipped with a warning. Throws
// DataError with fewer than 10 usable rows. A constant target yields
// all-zero scores and a warning.
ImportanceResult PermutationImportance(const std::vector<ResultRow>& rows,
                                       const ImportanceOptions& options = {});

}  // namespace memlab

#endif  // MEMLAB_ANALYSIS_H_
