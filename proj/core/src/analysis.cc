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

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include "json.hpp"

#include "memlab/error.h"
#include "memlab/random.h"

namespace memlab {

ImportanceResult PermutationImportance(const std::vector<ResultRow>& rows,
                                       const ImportanceOptions& options) {
  if (options.repeats < 1) throw ConfigError("importance repeats must be >= 1");
  constexpr int kFeatures = static_cast<int>(std::size(kImportanceFeatures));
  ImportanceResult out;

  std::vector<std::array<double, kFeatures>> xs;
  std::vector<double> ys;
  int skipped = 0;
  for (const auto& r : rows) {
    std::array<double, kFeatures> x{};
    bool ok = true;
    for (int j = 0; j < kFeatures && ok; ++j) {
      const std::string v = ColumnValue(r, kImportanceFeatures[j]);
      if (v == kMissing) ok = false;
      else x[j] = std::stod(v);
    }
    const std::string t = ColumnValue(r, options.target);
    if (t == kMissing) ok = false;
    if (!ok) {
      ++skipped;
      continue;
    }
    xs.push_back(x);
    ys.push_back(std::stod(t));
  }
  if (skipped > 0)
    out.warnings.push_back(std::to_string(skipped) + " rows lack a feature or the target");
  const int n = static_cast<int>(xs.size());
  if (n < 10) throw DataError("permutation importance needs >= 10 rows, got " + std::to_string(n));
  out.rows_used = n;

  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = ys[i];
  out.target_variance = (y.array() - y.mean()).square().mean();

  for (int j = 0; j < kFeatures; ++j)
    out.features.push_back({std::string(kImportanceFeatures[j]), 0.0, 0.0});
  if (out.target_variance < 1e-12) {
    out.warnings.push_back("target '" + options.target + "' is constant; scores are zero");
    return out;
  }

  // Standardize; constant columns stay zero and drop out of the fit.
  Eigen::MatrixXd design = Eigen::MatrixXd::Ones(n, kFeatures + 1);
  for (int j = 0; j < kFeatures; ++j) {
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) mean += xs[i][j];
    mean /= n;
    for (int i = 0; i < n; ++i) sq += (xs[i][j] - mean) * (xs[i][j] - mean);
    const double sd = std::sqrt(sq / n);
    for (int i = 0; i < n; ++i)
      design(i, j + 1) = sd > 0.0 ? (xs[i][j] - mean) / sd : 0.0;
  }
  const Eigen::VectorXd w = design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd fitted = design * w;
  out.baseline_mse = (fitted - y).squaredNorm() / n;

  Rng rng(DeriveSeed(options.seed, Stream::kImportance));
  std::vector<int> perm(n);
  for (int j = 0; j < kFeatures; ++j) {
    double shift = 0.0, increase = 0.0;
    for (int rep = 0; rep < options.repeats; ++rep) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      double abs_sum = 0.0, sq_sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const double delta = w[j + 1] * (design(perm[i], j + 1) - design(i, j + 1));
        abs_sum += std::fabs(delta);
        const double err = fitted[i] + delta - y[i];
        sq_sum += err * err;
      }
      shift += abs_sum / n;
      increase += sq_sum / n - out.baseline_mse;
    }
    out.features[j].prediction_shift = shift / options.repeats;
    out.features[j].error_increase = increase / options.repeats;
  }
  std::sort(out.features.begin(), out.features.end(),
            [](const FeatureImportance& a, const FeatureImportance& b) {
              if (a.prediction_shift != b.prediction_shift)
                return a.prediction_shift > b.prediction_shift;
              return a.feature < b.feature;
            });
  return out;
}

std::string ImportanceResult::ToJson() const {
  nlohmann::json j;
  j["rows_used"] = rows_used;
  j["baseline_mse"] = baseline_mse;
  j["target_variance"] = target_variance;
  auto& arr = j["features"] = nlohmann::json::array();
  for (const auto& f : features)
    arr.push_back({{"feature", f.feature},
                   {"prediction_shift", f.prediction_shift},
                   {"error_increase", f.error_increase}});
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

}  // namespace memlab
