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

#include "memlab/dpsgd.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memlab/error.h"
#include "memlab/random.h"

namespace memlab {
namespace {

template <typename Scalar>
double RoundingSlack(double clip_norm) {
  return 1e-9 + 16.0 * std::numeric_limits<Scalar>::epsilon() * clip_norm;
}

// Adds N(0, (sigma C)^2) to every coordinate, in flat order, then divides.
template <typename Scalar>
void AddNoiseAndScale(Gradients<Scalar>& sum, double sigma, double clip_norm,
                      std::uint64_t step_seed, double divisor) {
  auto& flat = sum.mutable_flat();
  if (sigma > 0.0) {
    Rng rng(step_seed);
    std::normal_distribution<double> noise(0.0, sigma * clip_norm);
    for (Eigen::Index i = 0; i < flat.size(); ++i)
      flat[i] = static_cast<Scalar>(static_cast<double>(flat[i]) + noise(rng));
  }
  flat /= static_cast<Scalar>(divisor);
}

}  // namespace

void DPConfig::Validate() const {
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
  if (!(noise_multiplier >= 0.0)) throw ConfigError("noise_multiplier must be >= 0");
  if (target_epsilon && !(*target_epsilon > 0.0))
    throw ConfigError("target_epsilon must be > 0");
  if (batch_size < 1) throw ConfigError("DP batch_size must be >= 1");
  if (delta && !(*delta > 0.0 && *delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("DP learning_rate must be > 0");
  if (microbatch_size < 1) throw ConfigError("microbatch_size must be >= 1");
}

std::int64_t DpSteps(const DPConfig& config, std::int64_t n) {
  if (config.sampling == DpSampling::kPoisson)
    return std::max<std::int64_t>(1, std::llround(static_cast<double>(n) / config.batch_size));
  return (n + config.batch_size - 1) / config.batch_size;
}

template <typename Scalar>
double ClipPerExample(Gradients<Scalar>& g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
  if (!g.AllFinite()) throw DataError("non-finite per-example gradient");
  const double norm = std::sqrt(g.flat().template cast<double>().squaredNorm());
  const double factor = norm > clip_norm ? clip_norm / norm : 1.0;
  if (factor < 1.0) g.mutable_flat() *= static_cast<Scalar>(factor);
  return factor;
}

template <typename Scalar>
Gradients<Scalar> NoisyAggregate(std::span<const Gradients<Scalar>> clipped,
                                 double sigma, double clip_norm,
                                 std::uint64_t step_seed, double divisor) {
  if (clipped.empty()) throw DataError("nothing to aggregate");
  if (!(divisor > 0.0)) throw ConfigError("aggregate divisor must be > 0");
  Gradients<Scalar> sum(clipped.front().config());
  auto& flat = sum.mutable_flat();
  for (const auto& g : clipped) {
    const double norm = std::sqrt(g.flat().template cast<double>().squaredNorm());
    if (!(norm <= clip_norm + RoundingSlack<Scalar>(clip_norm)))
      throw DataError("unclipped gradient in aggregate (norm " + std::to_string(norm) +
                      " > C = " + std::to_string(clip_norm) + ")");
    flat += g.flat();
  }
  AddNoiseAndScale(sum, sigma, clip_norm, step_seed, divisor);
  return sum;
}

template <typename Scalar>
DpTrainResult<Scalar> DpTrainEpoch(const ModelParams<Scalar>& init,
                                   const EncodedCorpus& train,
                                   const EncodedCorpus& valid, const DPConfig& dp,
                                   const TrainConfig& train_config,
                                   const TrainHooks<Scalar>& hooks) {
  dp.Validate();
  train_config.Validate();
  if (init.config().dropout != train_config.dropout)
    throw ConfigError("train dropout does not match the model's dropout");
  const EncodedCorpus seqs = TrainableSequences(train, init.config().max_seq_len);
  const auto n = static_cast<std::int64_t>(seqs.size());
  if (n == 0) throw DataError("training corpus has nothing to predict");
  if (dp.batch_size > n)
    throw ConfigError("DP batch size " + std::to_string(dp.batch_size) +
                      " exceeds the " + std::to_string(n) + " training examples");

  const double q = static_cast<double>(dp.batch_size) / static_cast<double>(n);
  const std::int64_t total = DpSteps(dp, n);
  const double delta = dp.delta.value_or(1.0 / (10.0 * static_cast<double>(n)));
  const double sigma = dp.target_epsilon
                           ? CalibrateNoiseMultiplier(*dp.target_epsilon, q, total, delta)
                           : dp.noise_multiplier;

  std::vector<std::vector<std::size_t>> fixed;
  if (dp.sampling == DpSampling::kShuffledBatches)
    fixed = ShuffledBatches(seqs.size(), dp.batch_size, train_config.seed);

  DpTrainResult<Scalar> out{init, {}, PrivacyLedger(delta, n, dp.clip_norm), sigma, delta};
  TrainReport& report = out.report;
  report.checkpoint_steps = CheckpointSteps(total, train_config.eval_checkpoints);
  ModelParams<Scalar> params = init;
  OptimState<Scalar> state(params, train_config);
  Gradients<Scalar> sum(params.config()), scratch(params.config());
  const Eigen::Index emb_size = params.slot(Tensor::kEmbedding).size();
  const std::uint64_t dropout_seed = DeriveSeed(train_config.seed, Stream::kDropout);
  double best = std::numeric_limits<double>::infinity();
  std::size_t next_eval = 0;

  for (std::int64_t step = 1; step <= total; ++step) {
    std::vector<std::size_t> members;
    if (dp.sampling == DpSampling::kPoisson) {
      Rng rng(DeriveSeed(dp.seed, static_cast<std::uint64_t>(Stream::kDpSample),
                         static_cast<std::uint64_t>(step)));
      std::bernoulli_distribution take(q);
      for (std::int64_t i = 0; i < n; ++i)
        if (take(rng)) members.push_back(static_cast<std::size_t>(i));
    } else {
      members = fixed[step - 1];
    }

    sum.mutable_flat().setZero();
    auto sum_emb = sum.mutable_tensor(Tensor::kEmbedding);
    auto sum_rest = sum.mutable_flat().tail(sum.size() - emb_size);
    double loss_total = 0.0;
    for (std::size_t start = 0; start < members.size(); start += dp.microbatch_size) {
      const std::size_t end = std::min(members.size(), start + dp.microbatch_size);
      SequenceBatch batch;
      for (std::size_t k = start; k < end; ++k) {
        batch.sequences.push_back(seqs[members[k]]);
        batch.dropout_keys.push_back(members[k]);
      }
      auto fr = Forward(params, batch, Mode::kTrain, dropout_seed);
      // Per-example token means: each example's loss is clipped on its own.
      LossPlan plan = MakeLossPlan(batch.sequences, LossReduction::kExampleMean);
      for (double& w : plan.weights) w *= static_cast<double>(batch.sequences.size());
      const auto loss = CrossEntropy<Scalar>(fr.logits, plan.targets, plan.weights);
      loss_total += loss.loss;
      BackwardPerSequence<Scalar>(
          fr.cache, params, loss.dlogits, scratch,
          [&](int, const Gradients<Scalar>& g, std::span<const TokenId> touched) {
            const auto emb = g.tensor(Tensor::kEmbedding);
            const auto rest = g.flat().tail(g.size() - emb_size);
            double sq = rest.template cast<double>().squaredNorm();
            for (TokenId id : touched) sq += emb.row(id).template cast<double>().squaredNorm();
            if (!std::isfinite(sq)) throw DataError("non-finite per-example gradient");
            const double norm = std::sqrt(sq);
            const Scalar factor =
                static_cast<Scalar>(norm > dp.clip_norm ? dp.clip_norm / norm : 1.0);
            sum_rest += factor * rest;
            for (TokenId id : touched) sum_emb.row(id) += factor * emb.row(id);
          });
    }

    const double divisor = dp.sampling == DpSampling::kPoisson
                               ? static_cast<double>(dp.batch_size)
                               : static_cast<double>(members.size());
    const std::uint64_t noise_seed =
        DeriveSeed(dp.seed, static_cast<std::uint64_t>(Stream::kDpNoise),
                   static_cast<std::uint64_t>(step));
    AddNoiseAndScale(sum, sigma, dp.clip_norm, noise_seed, divisor);
    AdamStep(params, sum, state, dp.learning_rate, train_config.l2_lambda);
    out.ledger.Record(sigma, q);
    report.train_loss.push_back(members.empty() ? 0.0 : loss_total / members.size());
    report.steps = step;
    if (hooks.on_step) hooks.on_step(step, params);

    while (next_eval < report.checkpoint_steps.size() &&
           report.checkpoint_steps[next_eval] == step) {
      const double nll = next_eval > 0 && report.checkpoint_steps[next_eval - 1] == step
                             ? report.valid_nll.back()
                             : Evaluate(params, valid, train_config.eval_batch_size).nll;
      report.valid_nll.push_back(nll);
      if (nll < best) {
        best = nll;
        report.selected = static_cast<int>(next_eval);
        out.best = params;
      }
      if (hooks.on_eval) hooks.on_eval(step, nll);
      ++next_eval;
    }
  }
  return out;
}

#define MEMLAB_INSTANTIATE_DPSGD(S)                                                \
  template double ClipPerExample<S>(Gradients<S>&, double);                        \
  template Gradients<S> NoisyAggregate<S>(std::span<const Gradients<S>>, double,   \
                                          double, std::uint64_t, double);          \
  template DpTrainResult<S> DpTrainEpoch<S>(const ModelParams<S>&,                 \
                                            const EncodedCorpus&,                  \
                                            const EncodedCorpus&, const DPConfig&, \
                                            const TrainConfig&, const TrainHooks<S>&);

MEMLAB_INSTANTIATE_DPSGD(float)
MEMLAB_INSTANTIATE_DPSGD(double)

}  // namespace memlab
