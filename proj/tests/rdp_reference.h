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

// Numeric reference for the subsampled Gaussian RDP accountant. It integrates
// the mixture moment directly instead of using any series expansion, so it
// shares nothing with the library implementation except the final
// RDP -> (epsilon, delta) conversion formula.

#ifndef MEMLAB_TESTS_RDP_REFERENCE_H_
#define MEMLAB_TESTS_RDP_REFERENCE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace memlab::testing {

// log E_{z ~ N(0, s^2)} [((1 - q) + q exp((2z - 1) / (2 s^2)))^a] by the
// trapezoid rule in log space.
inline double QuadratureLogMoment(double q, double sigma, double alpha) {
  const double s2 = sigma * sigma;
  auto log_f = [&](double z) {
    const double u = (2.0 * z - 1.0) / (2.0 * s2);
    // log((1 - q) + q e^u), computed stably.
    double mix;
    if (q >= 1.0) {
      mix = u;
    } else {
      const double a = std::log1p(-q), b = std::log(q) + u;
      const double hi = std::max(a, b);
      mix = hi + std::log1p(std::exp(std::min(a, b) - hi));
    }
    return -z * z / (2.0 * s2) - 0.5 * std::log(2.0 * M_PI * s2) + alpha * mix;
  };
  const double lo = -30.0 * sigma - 1.0;
  const double hi = alpha + 30.0 * sigma + 1.0;
  const int n = static_cast<int>(std::min(2e6, std::max(2e4, (hi - lo) / (sigma / 400.0))));
  const double h = (hi - lo) / n;
  std::vector<double> v(n + 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    v[i] = log_f(lo + h * i);
    peak = std::max(peak, v[i]);
  }
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) sum += (i == 0 || i == n ? 0.5 : 1.0) * std::exp(v[i] - peak);
  return peak + std::log(sum * h);
}

inline std::vector<double> ReferenceOrders() {
  std::vector<double> orders;
  for (int i = 1; i <= 9; ++i) orders.push_back(1.0 + i / 10.0);
  for (int i = 2; i <= 10; ++i) orders.push_back(i + 0.5);
  for (int i = 2; i <= 64; ++i) orders.push_back(i);
  orders.push_back(128);
  orders.push_back(256);
  return orders;
}

inline double ReferenceEpsilon(double sigma, double q, std::int64_t steps, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (double a : ReferenceOrders()) {
    const double rdp = steps * QuadratureLogMoment(q, sigma, a) / (a - 1.0);
    const double eps = rdp + std::log1p(-1.0 / a) - (std::log(delta) + std::log(a)) / (a - 1.0);
    best = std::min(best, eps);
  }
  return std::max(best, 0.0);
}

struct FrozenEpsilon {
  double sigma, q;
  std::int64_t steps;
  double delta, epsilon;
};

// Values from an independent open-source RDP accountant over the same order
// set. Where that accountant skipped orders whose series failed to converge
// (the second, fourth and ninth points) its value is a slightly looser bound.
inline constexpr FrozenEpsilon kFrozenEpsilons[] = {
    {1.0, 0.01, 1000, 1e-5, 2.1077530754515745},
    {0.6, 0.06, 16, 1.5e-6, 9.774368757421428},
    {2.0, 0.001, 10000, 1e-6, 0.24471730638391861},
    {0.8, 0.1, 100, 1e-5, 12.41537157351243},
    {5.0, 0.5, 10, 1e-5, 1.407324621431075},
    {1.1, 0.02, 500, 1e-6, 2.9430590714020246},
    {0.5, 0.004, 250, 1e-5, 6.413586714235484},
    {3.0, 1.0, 5, 1e-5, 3.384796317269672},
    {1.5, 0.2, 50, 1e-7, 7.2230131061145695},
    {0.7, 0.05, 30, 1e-6, 7.445068097637385},
};

}  // namespace memlab::testing

#endif  // MEMLAB_TESTS_RDP_REFERENCE_H_
