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

#include "memlab/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "memlab/error.h"
#include "memlab/random.h"

namespace memlab {

void TrainConfig::Validate() const {
  if (!(max_lr > 0.0)) throw ConfigError("max_lr must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(grad_clip > 0.0)) throw ConfigError("grad_clip must be > 0");
  if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (epochs != 1) throw ConfigError("only single-epoch training is supported");
  if (eval_checkpoints < 1) throw ConfigError("eval_checkpoints must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ConfigError("Adam betas must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  if (eval_batch_size < 1) throw ConfigError("eval_batch_size must be >= 1");
}

template <typename Scalar>
OptimState<Scalar>::OptimState(const ModelParams<Scalar>& params,
                               const TrainConfig& config)
    : m(ParamStore<Scalar>::Vector::Zero(params.size())),
      v(ParamStore<Scalar>::Vector::Zero(params.size())),
      beta1(config.adam_beta1),
      beta2(config.adam_beta2),
      epsilon(config.adam_epsilon) {}

double LrAt(const TrainConfig& config, std::int64_t step, std::int64_t total_steps) {
  if (config.schedule == Schedule::kConstant) return config.max_lr;
  if (total_steps <= 0) return 0.0;
  step = std::clamp<std::int64_t>(step, 0, total_steps);
  const double warmup = static_cast<double>(total_steps) / 16.0;
  const double s = static_cast<double>(step);
  if (s < warmup) return config.max_lr * s / warmup;
  return config.max_lr * (static_cast<double>(total_steps) - s) /
         (static_cast<double>(total_steps) - warmup);
}

template <typename Scalar>
double ClipGlobal(Gradients<Scalar>& grads, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("clip threshold must be > 0");
  const auto& flat = grads.flat();
  if (!flat.allFinite()) throw DataError("non-finite gradient");
  const double norm = std::sqrt(flat.template cast<double>().squaredNorm());
  if (norm > threshold) grads.mutable_flat() *= static_cast<Scalar>(threshold / norm);
  return norm;
}

template <typename Scalar>
void AdamStep(ModelParams<Scalar>& params, const Gradients<Scalar>& grads,
              OptimState<Scalar>& state, double lr, double l2_lambda) {
  if (grads.size() != params.size() || state.m.size() != params.size())
    throw DataError("Adam: shape mismatch");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const Scalar b1 = static_cast<Scalar>(state.beta1);
  const Scalar b2 = static_cast<Scalar>(state.beta2);
  const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(state.beta1, t));
  const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(state.beta2, t));
  const Scalar step = static_cast<Scalar>(lr);
  const Scalar eps = static_cast<Scalar>(state.epsilon);
  const Scalar l2 = static_cast<Scalar>(2.0 * l2_lambda);
  auto& theta = params.mutable_flat();
  const auto& g = grads.flat();
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const Scalar gi = g[i] + l2 * theta[i];
    state.m[i] = b1 * state.m[i] + (Scalar(1) - b1) * gi;
    state.v[i] = b2 * state.v[i] + (Scalar(1) - b2) * gi * gi;
    const Scalar mhat = state.m[i] / c1;
    const Scalar vhat = state.v[i] / c2;
    theta[i] -= step * mhat / (std::sqrt(vhat) + eps);
  }
}

EncodedCorpus TrainableSequences(const EncodedCorpus& corpus, int max_seq_len) {
  EncodedCorpus out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus) {
    if (doc.size() < 2) continue;
    const std::size_t len = std::min<std::size_t>(doc.size(), max_seq_len);
    out.emplace_back(doc.begin(), doc.begin() + len);
  }
  return out;
}

std::vector<std::vector<std::size_t>> ShuffledBatches(std::size_t n, int batch_size,
                                                      std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(DeriveSeed(seed, Stream::kShuffle));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += batch_size)
    batches.emplace_back(order.begin() + i,
                         order.begin() + std::min(n, i + static_cast<std::size_t>(batch_size)));
  return batches;
}

std::vector<std::int64_t> CheckpointSteps(std::int64_t total_steps, int count) {
  std::vector<std::int64_t> out;
  for (int k = 1; k <= count; ++k)
    out.push_back((k * total_steps + count - 1) / count);
  return out;
}

LossPlan MakeLossPlan(std::span<const std::vector<TokenId>> sequences,
                      LossReduction reduction) {
  LossPlan plan;
  std::int64_t predicted = 0;
  for (const auto& s : sequences) predicted += static_cast<std::int64_t>(s.size()) - 1;
  if (predicted <= 0) throw DataError("batch has no predicted positions");
  for (const auto& s : sequences) {
    const double w = reduction == LossReduction::kTokenMean
                         ? 1.0 / static_cast<double>(predicted)
                         : 1.0 / (static_cast<double>(s.size() - 1) *
                                  static_cast<double>(sequences.size()));
    for (std::size_t t = 0; t < s.size(); ++t) {
      const bool has_target = t + 1 < s.size();
      plan.targets.push_back(has_target ? s[t + 1] : 0);
      plan.weights.push_back(has_target ? w : 0.0);
    }
  }
  return plan;
}

template <typename Scalar>
EvalResult Evaluate(const ModelParams<Scalar>& params, const EncodedCorpus& split,
                    int batch_size) {
  const EncodedCorpus seqs = TrainableSequences(split, params.config().max_seq_len);
  if (seqs.empty()) throw DataError("evaluation split has nothing to predict");
  double nll = 0.0;
  std::int64_t correct = 0, tokens = 0;
  for (std::size_t start = 0; start < seqs.size(); start += batch_size) {
    SequenceBatch batch;
    const std::size_t end = std::min(seqs.size(), start + batch_size);
    batch.sequences.assign(seqs.begin() + start, seqs.begin() + end);
    const auto fr = Forward(params, batch, Mode::kEval, 0);
    Eigen::Index r = 0;
    for (const auto& s : batch.sequences) {
      for (std::size_t t = 0; t < s.size(); ++t, ++r) {
        if (t + 1 == s.size()) continue;
        const auto row = fr.logits.row(r);
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < row.size(); ++j)
          if (row[j] > row[best]) best = j;
        const double m = static_cast<double>(row[best]);
        double sum = 0.0;
        for (Eigen::Index j = 0; j < row.size(); ++j)
          sum += std::exp(static_cast<double>(row[j]) - m);
        nll += m + std::log(sum) - static_cast<double>(row[s[t + 1]]);
        correct += best == s[t + 1];
        ++tokens;
      }
    }
  }
  return {nll / static_cast<double>(tokens),
          100.0 * static_cast<double>(correct) / static_cast<double>(tokens), tokens};
}

template <typename Scalar>
TrainResult<Scalar> TrainEpoch(const ModelParams<Scalar>& init,
                               const EncodedCorpus& train,
                               const EncodedCorpus& valid,
                               const TrainConfig& config,
                               const TrainHooks<Scalar>& hooks) {
  config.Validate();
  if (init.config().dropout != config.dropout)
    throw ConfigError("train dropout does not match the model's dropout");
  const EncodedCorpus seqs = TrainableSequences(train, init.config().max_seq_len);
  if (seqs.empty()) throw DataError("training corpus has nothing to predict");

  const auto batches = ShuffledBatches(seqs.size(), config.batch_size, config.seed);
  const auto total = static_cast<std::int64_t>(batches.size());
  const std::uint64_t dropout_seed = DeriveSeed(config.seed, Stream::kDropout);

  TrainResult<Scalar> out{init, {}};
  TrainReport& report = out.report;
  report.checkpoint_steps = CheckpointSteps(total, config.eval_checkpoints);
  ModelParams<Scalar> params = init;
  OptimState<Scalar> state(params, config);
  double best = std::numeric_limits<double>::infinity();
  std::size_t next_eval = 0;

  for (std::int64_t step = 1; step <= total; ++step) {
    SequenceBatch batch;
    for (std::size_t i : batches[step - 1]) {
      batch.sequences.push_back(seqs[i]);
      batch.dropout_keys.push_back(i);
    }
    auto fr = Forward(params, batch, Mode::kTrain, dropout_seed);
    const LossPlan plan = MakeLossPlan(batch.sequences, config.reduction);
    const auto loss = CrossEntropy<Scalar>(fr.logits, plan.targets, plan.weights);
    Gradients<Scalar> grads = Backward(fr.cache, params, loss.dlogits);
    if (std::isfinite(config.grad_clip)) ClipGlobal(grads, config.grad_clip);
    AdamStep(params, grads, state, LrAt(config, step, total), config.l2_lambda);
    report.train_loss.push_back(loss.loss);
    report.steps = step;
    if (hooks.on_step) hooks.on_step(step, params);

    while (next_eval < report.checkpoint_steps.size() &&
           report.checkpoint_steps[next_eval] == step) {
      const double nll = next_eval > 0 && report.checkpoint_steps[next_eval - 1] == step
                             ? report.valid_nll.back()
                             : Evaluate(params, valid, config.eval_batch_size).nll;
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

#define MEMLAB_INSTANTIATE_TRAIN(S)                                               \
  template struct OptimState<S>;                                                  \
  template double ClipGlobal<S>(Gradients<S>&, double);                           \
  template void AdamStep<S>(ModelParams<S>&, const Gradients<S>&, OptimState<S>&, \
                            double, double);                                      \
  template EvalResult Evaluate<S>(const ModelParams<S>&, const EncodedCorpus&, int); \
  template TrainResult<S> TrainEpoch<S>(const ModelParams<S>&, const EncodedCorpus&, \
                                        const EncodedCorpus&, const TrainConfig&, \
                                        const TrainHooks<S>&);

MEMLAB_INSTANTIATE_TRAIN(float)
MEMLAB_INSTANTIATE_TRAIN(double)

}  // namespace memlab
