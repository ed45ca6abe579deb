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

#ifndef MEMLAB_DPSGD_H_
#define MEMLAB_DPSGD_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memlab/model.h"
#include "memlab/train.h"

namespace memlab {

// ---------------------------------------------------------------------------
// Renyi DP accountant for the Poisson-subsampled Gaussian mechanism.

// Orders used by RdpEpsilon: 1.1..1.9 step 0.1, 2.5..10.5 step 1, the
// integers 2..64, then 128 and 256.
const std::vector<double>& DefaultRdpOrders();

// RDP of one step of the subsampled Gaussian with sampling rate q and noise
// multiplier sigma at order alpha > 1. Returns +inf when sigma == 0.
double SubsampledGaussianRdp(double q, double sigma, double alpha);

// Best (epsilon, order) over the orders for the accumulated RDP curve.
struct EpsilonAtOrder {
  double epsilon = 0.0;
  double order = 0.0;
};
EpsilonAtOrder RdpToEpsilon(std::span<const double> orders,
                            std::span<const double> rdp, double delta);

// Epsilon after `steps` compositions at delta. Returns 0 for steps == 0 and
// +inf (never NaN) for sigma == 0 with q > 0.
double RdpEpsilon(double sigma, double q, std::int64_t steps, double delta);

// Smallest noise multiplier (to relative tolerance 1e-6) reaching
// target_epsilon. Throws ConfigError on invalid input.
double CalibrateNoiseMultiplier(double target_epsilon, double q,
                                std::int64_t steps, double delta);

struct PrivacyStep {
  double sigma = 0.0;
  double q = 0.0;
  bool operator==(const PrivacyStep&) const = default;
};

class PrivacyLedger {
 public:
  PrivacyLedger() = default;
  PrivacyLedger(double delta, std::int64_t dataset_size, double clip_norm);

  void Record(double sigma, double q);
  std::int64_t steps() const { return static_cast<std::int64_t>(records_.size()); }
  const std::vector<PrivacyStep>& records() const { return records_; }
  double delta() const { return delta_; }
  std::int64_t dataset_size() const { return dataset_size_; }
  double clip_norm() const { return clip_norm_; }
  // Epsilon at delta() for all recorded steps; cached until the next Record.
  double Epsilon() const;
  double EpsilonAt(double delta) const;

  std::string ToJson() const;
  // Throws ParseError.
  static PrivacyLedger FromJson(const std::string& text);
  void Save(const std::string& path) const;

  bool operator==(const PrivacyLedger& other) const;

 private:
  std::vector<PrivacyStep> records_;
  double delta_ = 0.0;
  std::int64_t dataset_size_ = 0;
  double clip_norm_ = 0.0;
  mutable std::optional<double> epsilon_;
};

// ---------------------------------------------------------------------------
// DP-SGD.

enum class DpSampling {
  // Each example joins a step independently with probability q = B / N;
  // T = round(N / B) steps. Matches the accountant.
  kPoisson,
  // The seeded shuffled fixed-size batches of non-private training. The
  // accountant still reports the Poisson bound for q = B / N.
  kShuffledBatches,
};

struct DPConfig {
  double clip_norm = 1.0;
  double noise_multiplier = 1.0;
  // When set, noise_multiplier is calibrated to reach this epsilon.
  std::optional<double> target_epsilon;
  int batch_size = 4096;  // expected batch size B
  // Defaults to 1 / (10 N).
  std::optional<double> delta;
  double learning_rate = 1e-4;
  int microbatch_size = 64;
  DpSampling sampling = DpSampling::kPoisson;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
  bool operator==(const DPConfig&) const = default;
};

// Number of DP steps in one epoch over n examples.
std::int64_t DpSteps(const DPConfig& config, std::int64_t n);

// Scales g in place to norm min(||g||, C) and returns the scale factor.
// Throws DataError on non-finite input.
template <typename Scalar>
double ClipPerExample(Gradients<Scalar>& g, double clip_norm);

// (sum_i g_i + N(0, sigma^2 C^2 I)) / divisor, with the noise drawn in flat
// parameter order from Rng(step_seed). Throws DataError if an input has norm
// above C (beyond rounding of the scalar type).
template <typename Scalar>
Gradients<Scalar> NoisyAggregate(std::span<const Gradients<Scalar>> clipped,
                                 double sigma, double clip_norm,
                                 std::uint64_t step_seed, double divisor);

template <typename Scalar>
struct DpTrainResult {
  ModelParams<Scalar> best;
  TrainReport report;
  PrivacyLedger ledger;
  double noise_multiplier = 0.0;
  double delta = 0.0;
};

// One DP-SGD epoch. From `train_config` only the L2 term, Adam constants,
// dropout, evaluation settings, and seed are used; learning rate comes from
// dp (constant schedule) and per-example clipping replaces global clipping.
// Per-example losses are per-token means; the aggregate divides by B for
// Poisson sampling and by the actual batch size for fixed batches.
template <typename Scalar>
DpTrainResult<Scalar> DpTrainEpoch(const ModelParams<Scalar>& init,
                                   const EncodedCorpus& train,
                                   const EncodedCorpus& valid, const DPConfig& dp,
                                   const TrainConfig& train_config,
                                   const TrainHooks<Scalar>& hooks = {});

}  // namespace memlab

#endif  // MEMLAB_DPSGD_H_
