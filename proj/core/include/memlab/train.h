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

#ifndef MEMLAB_TRAIN_H_
#define MEMLAB_TRAIN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "memlab/model.h"

namespace memlab {

// Documents encoded with a shared vocabulary.
using EncodedCorpus = std::vector<std::vector<TokenId>>;

enum class Schedule { kWarmupDecay, kConstant };

// How per-position cross-entropy is reduced to the batch loss.
//   kTokenMean:   mean over all predicted positions in the batch.
//   kExampleMean: mean over examples of each example's per-token mean. This is
//                 the reduction whose per-example terms DP-SGD clips.
enum class LossReduction { kTokenMean, kExampleMean };

struct TrainConfig {
  double max_lr = 1e-3;
  int batch_size = 64;
  // Global gradient-norm clip; +inf disables clipping.
  double grad_clip = 1.0;
  double l2_lambda = 0.0;
  // Must equal the dropout of the model being trained.
  double dropout = 0.1;
  int epochs = 1;
  int eval_checkpoints = 16;
  Schedule schedule = Schedule::kWarmupDecay;
  LossReduction reduction = LossReduction::kTokenMean;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Sequences per forward pass during evaluation.
  int eval_batch_size = 128;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

template <typename Scalar>
struct OptimState {
  typename ParamStore<Scalar>::Vector m;
  typename ParamStore<Scalar>::Vector v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  OptimState() = default;
  OptimState(const ModelParams<Scalar>& params, const TrainConfig& config);
};

struct TrainReport {
  std::vector<std::int64_t> checkpoint_steps;
  std::vector<double> valid_nll;
  int selected = -1;  // index into valid_nll
  std::int64_t steps = 0;
  std::vector<double> train_loss;  // per step
  double test_nll = 0.0;
  double test_accuracy = 0.0;

  bool operator==(const TrainReport&) const = default;
};

// Learning rate for the update at `step` of `total_steps`. Warmup-decay rises
// linearly from 0 to max_lr over the first total/16 steps, then falls
// linearly to 0 at total_steps.
double LrAt(const TrainConfig& config, std::int64_t step, std::int64_t total_steps);

// Scales grads so that their global L2 norm is at most threshold. Returns the
// norm before clipping. Throws DataError on non-finite gradients.
template <typename Scalar>
double ClipGlobal(Gradients<Scalar>& grads, double threshold);

// One bias-corrected Adam step on g + 2 * l2_lambda * params.
template <typename Scalar>
void AdamStep(ModelParams<Scalar>& params, const Gradients<Scalar>& grads,
              OptimState<Scalar>& state, double lr, double l2_lambda);

struct EvalResult {
  double nll = 0.0;       // nats per predicted token
  double accuracy = 0.0;  // percent, argmax with ties to the lowest id
  std::int64_t tokens = 0;
};

// Evaluation-mode NLL and top-1 accuracy over every predicted position
// (tokens 2..len of each document). Throws DataError if there is nothing to
// predict.
template <typename Scalar>
EvalResult Evaluate(const ModelParams<Scalar>& params, const EncodedCorpus& split,
                    int batch_size = 128);

// Documents with at least two tokens, truncated to max_seq_len.
EncodedCorpus TrainableSequences(const EncodedCorpus& corpus, int max_seq_len);

// Seeded shuffle of [0, n) cut into consecutive batches of batch_size (the
// last batch may be short).
std::vector<std::vector<std::size_t>> ShuffledBatches(std::size_t n, int batch_size,
                                                      std::uint64_t seed);

// Update steps at which evaluation runs: ceil(k * total / count), k = 1..count.
std::vector<std::int64_t> CheckpointSteps(std::int64_t total_steps, int count);

// Row weights and targets that reduce packed logits to the batch loss.
struct LossPlan {
  std::vector<TokenId> targets;
  std::vector<double> weights;
};
LossPlan MakeLossPlan(std::span<const std::vector<TokenId>> sequences,
                      LossReduction reduction);

template <typename Scalar>
struct TrainHooks {
  // Called after every update with the 1-based step and updated params.
  std::function<void(std::int64_t, const ModelParams<Scalar>&)> on_step;
  // Called after every evaluation checkpoint.
  std::function<void(std::int64_t step, double valid_nll)> on_eval;
};

template <typename Scalar>
struct TrainResult {
  ModelParams<Scalar> best;
  TrainReport report;
};

// One epoch over train with evaluation on valid at each checkpoint. Returns
// the checkpoint with the lowest validation NLL (ties to the earliest).
template <typename Scalar>
TrainResult<Scalar> TrainEpoch(const ModelParams<Scalar>& init,
                               const EncodedCorpus& train,
                               const EncodedCorpus& valid,
                               const TrainConfig& config,
                               const TrainHooks<Scalar>& hooks = {});

}  // namespace memlab

#endif  // MEMLAB_TRAIN_H_
