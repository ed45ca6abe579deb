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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

#include "json.hpp"

#include "memlab/dpsgd.h"
#include "memlab/error.h"

namespace memlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(exp(a) - exp(b)), a >= b.
double LogSub(double a, double b) {
  if (b == -kInf) return a;
  if (a <= b) return -kInf;
  return a + std::log1p(-std::exp(b - a));
}

double LogErfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // Asymptotic expansion; erfc underflows here.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) -
                        15.0 / (8.0 * x2 * x2 * x2);
  return -x2 - std::log(x) - 0.5 * std::log(std::numbers::pi) + std::log(series);
}

double LogAInteger(double q, double sigma, int alpha) {
  double log_a = -kInf;
  double log_binom = 0.0;  // log C(alpha, i)
  for (int i = 0; i <= alpha; ++i) {
    if (i > 0) log_binom += std::log(static_cast<double>(alpha - i + 1)) - std::log(i);
    const double term = log_binom + i * std::log(q) + (alpha - i) * std::log1p(-q) +
                        (static_cast<double>(i) * i - i) / (2.0 * sigma * sigma);
    log_a = LogAdd(log_a, term);
  }
  return log_a;
}

// Two-sided series for fractional orders, split at the point z0 where the
// mixture and base densities cross.
double LogAFractional(double q, double sigma, double alpha) {
  double log_a0 = -kInf, log_a1 = -kInf;
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  double log_coef = 0.0;  // log |binom(alpha, i)|
  double sign = 1.0;
  for (int i = 0;; ++i) {
    if (i > 0) {
      const double f = alpha - (i - 1);
      log_coef += std::log(std::fabs(f)) - std::log(i);
      if (f < 0) sign = -sign;
    }
    const double j = alpha - i;
    const double log_t0 = log_coef + i * std::log(q) + j * std::log1p(-q);
    const double log_t1 = log_coef + j * std::log(q) + i * std::log1p(-q);
    const double log_e0 =
        std::log(0.5) + LogErfc((i - z0) / (std::numbers::sqrt2 * sigma));
    const double log_e1 =
        std::log(0.5) + LogErfc((z0 - j) / (std::numbers::sqrt2 * sigma));
    const double log_s0 = log_t0 + (static_cast<double>(i) * i - i) / (2 * sigma * sigma) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2 * sigma * sigma) + log_e1;
    if (sign > 0) {
      log_a0 = LogAdd(log_a0, log_s0);
      log_a1 = LogAdd(log_a1, log_s1);
    } else {
      log_a0 = LogSub(log_a0, log_s0);
      log_a1 = LogSub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30.0 || i > 100000) break;
  }
  return LogAdd(log_a0, log_a1);
}

}  // namespace

const std::vector<double>& DefaultRdpOrders() {
  static const std::vector<double> orders = [] {
    std::vector<double> o;
    for (int k = 1; k <= 9; ++k) o.push_back(1.0 + k / 10.0);
    for (int k = 0; k <= 8; ++k) o.push_back(2.5 + k);
    for (int a = 2; a <= 64; ++a) o.push_back(a);
    o.push_back(128);
    o.push_back(256);
    std::sort(o.begin(), o.end());
    return o;
  }();
  return orders;
}

double SubsampledGaussianRdp(double q, double sigma, double alpha) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("sampling rate must be in [0, 1]");
  if (!(sigma >= 0.0)) throw ConfigError("noise multiplier must be >= 0");
  if (!(alpha > 1.0)) throw ConfigError("RDP order must be > 1");
  if (q == 0.0) return 0.0;
  if (sigma == 0.0) return kInf;
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  if (std::isinf(alpha)) return kInf;
  const double log_a = alpha == std::floor(alpha) && alpha < 1e6
                           ? LogAInteger(q, sigma, static_cast<int>(alpha))
                           : LogAFractional(q, sigma, alpha);
  return log_a / (alpha - 1.0);
}

EpsilonAtOrder RdpToEpsilon(std::span<const double> orders,
                            std::span<const double> rdp, double delta) {
  if (orders.size() != rdp.size() || orders.empty())
    throw ConfigError("orders and RDP values must be nonempty and equal length");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
  EpsilonAtOrder best{kInf, orders[0]};
  for (std::size_t k = 0; k < orders.size(); ++k) {
    const double a = orders[k], r = rdp[k];
    if (r < 0.0) throw ConfigError("RDP values must be >= 0");
    double eps;
    if (delta * delta + std::expm1(-r) > 0.0) {
      eps = 0.0;  // covered by the KL bound
    } else if (a > 1.01) {
      eps = r + std::log1p(-1.0 / a) - std::log(delta * a) / (a - 1.0);
    } else {
      eps = kInf;
    }
    if (eps < best.epsilon) best = {eps, a};
  }
  best.epsilon = std::max(0.0, best.epsilon);
  return best;
}

double RdpEpsilon(double sigma, double q, std::int64_t steps, double delta) {
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("sampling rate must be in (0, 1]");
  if (!(sigma >= 0.0)) throw ConfigError("noise multiplier must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
  if (steps == 0) return 0.0;
  if (sigma == 0.0) return kInf;
  const auto& orders = DefaultRdpOrders();
  std::vector<double> rdp(orders.size());
  for (std::size_t k = 0; k < orders.size(); ++k)
    rdp[k] = static_cast<double>(steps) * SubsampledGaussianRdp(q, sigma, orders[k]);
  return RdpToEpsilon(orders, rdp, delta).epsilon;
}

double CalibrateNoiseMultiplier(double target_epsilon, double q,
                                std::int64_t steps, double delta) {
  if (!(target_epsilon > 0.0)) throw ConfigError("target epsilon must be > 0");
  if (steps <= 0) throw ConfigError("calibration needs at least one step");
  double hi = 1.0;
  while (RdpEpsilon(hi, q, steps, delta) > target_epsilon) {
    hi *= 2.0;
    if (hi > 1e6) throw ConfigError("cannot reach target epsilon");
  }
  double lo = 0.0;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (RdpEpsilon(mid, q, steps, delta) > target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

PrivacyLedger::PrivacyLedger(double delta, std::int64_t dataset_size, double clip_norm)
    : delta_(delta), dataset_size_(dataset_size), clip_norm_(clip_norm) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
}

void PrivacyLedger::Record(double sigma, double q) {
  records_.push_back({sigma, q});
  epsilon_.reset();
}

double PrivacyLedger::EpsilonAt(double delta) const {
  if (records_.empty()) return 0.0;
  // Steps with identical (sigma, q) share one RDP evaluation.
  std::map<std::pair<double, double>, std::int64_t> groups;
  for (const auto& r : records_) ++groups[{r.sigma, r.q}];
  const auto& orders = DefaultRdpOrders();
  std::vector<double> rdp(orders.size(), 0.0);
  for (const auto& [key, count] : groups) {
    if (key.second == 0.0) continue;
    if (key.first == 0.0) return kInf;
    for (std::size_t k = 0; k < orders.size(); ++k)
      rdp[k] += static_cast<double>(count) *
                SubsampledGaussianRdp(key.second, key.first, orders[k]);
  }
  return RdpToEpsilon(orders, rdp, delta).epsilon;
}

double PrivacyLedger::Epsilon() const {
  if (!epsilon_) epsilon_ = EpsilonAt(delta_);
  return *epsilon_;
}

std::string PrivacyLedger::ToJson() const {
  nlohmann::json j;
  j["delta"] = delta_;
  j["dataset_size"] = dataset_size_;
  j["clip_norm"] = clip_norm_;
  j["steps"] = steps();
  const double eps = Epsilon();
  j["epsilon"] = std::isfinite(eps) ? nlohmann::json(eps) : nlohmann::json(nullptr);
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : records_) recs.push_back({{"sigma", r.sigma}, {"q", r.q}});
  return j.dump(2) + "\n";
}

PrivacyLedger PrivacyLedger::FromJson(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    PrivacyLedger out(j.at("delta").get<double>(), j.at("dataset_size").get<std::int64_t>(),
                      j.at("clip_norm").get<double>());
    for (const auto& r : j.at("records"))
      out.records_.push_back({r.at("sigma").get<double>(), r.at("q").get<double>()});
    if (j.at("steps").get<std::int64_t>() != out.steps())
      throw ParseError("privacy ledger: step count does not match records");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("privacy ledger: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("privacy ledger: ") + e.what());
  }
}

void PrivacyLedger::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write privacy ledger " + path);
  out << ToJson();
  if (!out) throw IoError("cannot write privacy ledger " + path);
}

bool PrivacyLedger::operator==(const PrivacyLedger& other) const {
  return records_ == other.records_ && delta_ == other.delta_ &&
         dataset_size_ == other.dataset_size_ && clip_norm_ == other.clip_norm_;
}

}  // namespace memlab
