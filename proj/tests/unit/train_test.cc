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

#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "memlab/error.h"
#include "test_util.h"

namespace memlab {
namespace {

using testing::SmallConfig;

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.epochs = 2;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.max_lr = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.adam_beta2 = 1.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.grad_clip = std::numeric_limits<double>::infinity();
  EXPECT_NO_THROW(c.Validate());
}

TEST(LrScheduleTest, WarmupThenLinearDecay) {
  TrainConfig c;
  c.max_lr = 2.0;
  const std::int64_t total = 160;  // warmup = 10 steps
  for (std::int64_t s = 0; s <= total; ++s) {
    const double expect = s < 10 ? 2.0 * s / 10.0 : 2.0 * (160.0 - s) / 150.0;
    EXPECT_DOUBLE_EQ(LrAt(c, s, total), expect) << s;
  }
  EXPECT_DOUBLE_EQ(LrAt(c, 10, total), 2.0);
  c.schedule = Schedule::kConstant;
  EXPECT_DOUBLE_EQ(LrAt(c, 77, total), 2.0);
}

TEST(LrScheduleTest, FractionalWarmup) {
  TrainConfig c;
  c.max_lr = 1.0;
  // total 8 -> warmup 0.5 steps: step 0 is warmup, later steps decay.
  EXPECT_DOUBLE_EQ(LrAt(c, 0, 8), 0.0);
  EXPECT_DOUBLE_EQ(LrAt(c, 1, 8), 7.0 / 7.5);
  EXPECT_DOUBLE_EQ(LrAt(c, 8, 8), 0.0);
}

TEST(ClipTest, ScalesOnlyAboveThreshold) {
  Gradients<double> g(SmallConfig(3, 1));
  g.mutable_flat().setZero();
  g.mutable_flat()[0] = 3.0;
  g.mutable_flat()[1] = 4.0;
  EXPECT_DOUBLE_EQ(ClipGlobal(g, 10.0), 5.0);
  EXPECT_DOUBLE_EQ(g.flat()[0], 3.0);
  EXPECT_DOUBLE_EQ(ClipGlobal(g, 1.0), 5.0);
  EXPECT_NEAR(g.flat().norm(), 1.0, 1e-15);
  EXPECT_NEAR(g.flat()[1] / g.flat()[0], 4.0 / 3.0, 1e-15);
  g.mutable_flat()[2] = std::nan("");
  EXPECT_THROW(ClipGlobal(g, 1.0), DataError);
}

// Scalar Adam written out from the update equations.
struct ScalarAdam {
  double m = 0, v = 0, b1, b2, eps;
  int t = 0;
  double Step(double theta, double g, double lr, double l2) {
    g += 2 * l2 * theta;
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    return theta - lr * mh / (std::sqrt(vh) + eps);
  }
};

TEST(AdamTest, MatchesScalarReference) {
  const ModelConfig cfg = SmallConfig(2, 1);
  auto params = InitParams<double>(cfg);
  TrainConfig tc;
  tc.adam_beta1 = 0.8;
  tc.adam_beta2 = 0.95;
  tc.adam_epsilon = 1e-6;
  OptimState<double> state(params, tc);
  std::vector<ScalarAdam> ref(params.size(), ScalarAdam{0, 0, 0.8, 0.95, 1e-6, 0});
  std::vector<double> theta(params.flat().data(), params.flat().data() + params.size());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int step = 0; step < 25; ++step) {
    Gradients<double> g(cfg);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.mutable_flat()[i] = normal(rng);
    const double lr = 0.01 * (step + 1);
    AdamStep(params, g, state, lr, 0.05);
    for (Eigen::Index i = 0; i < g.size(); ++i)
      theta[i] = ref[i].Step(theta[i], g.flat()[i], lr, 0.05);
  }
  for (Eigen::Index i = 0; i < params.size(); ++i) EXPECT_NEAR(params.flat()[i], theta[i], 1e-13);
  EXPECT_EQ(state.step, 25);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * sign(g) (eps aside).
  const ModelConfig cfg = SmallConfig(2, 1);
  ModelParams<double> p(cfg);
  Gradients<double> g(cfg);
  g.mutable_flat().setConstant(-3.0);
  OptimState<double> st(p, TrainConfig{});
  AdamStep(p, g, st, 0.1, 0.0);
  EXPECT_NEAR(p.flat()[0], 0.1, 1e-8);
}

TEST(BatchingTest, ShuffledBatchesPartition) {
  const auto batches = ShuffledBatches(103, 10, 5);
  ASSERT_EQ(batches.size(), 11u);
  EXPECT_EQ(batches.back().size(), 3u);
  std::set<std::size_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  EXPECT_EQ(seen.size(), 103u);
  EXPECT_EQ(*seen.rbegin(), 102u);
  EXPECT_EQ(ShuffledBatches(103, 10, 5), batches);
  EXPECT_NE(ShuffledBatches(103, 10, 6), batches);
}

TEST(BatchingTest, CheckpointSteps) {
  EXPECT_EQ(CheckpointSteps(32, 16), (std::vector<std::int64_t>{2, 4, 6, 8, 10, 12, 14, 16, 18,
                                                                20, 22, 24, 26, 28, 30, 32}));
  EXPECT_EQ(CheckpointSteps(5, 4), (std::vector<std::int64_t>{2, 3, 4, 5}));
  const auto few = CheckpointSteps(3, 16);
  EXPECT_EQ(few.size(), 16u);
  EXPECT_EQ(few.back(), 3);
  EXPECT_TRUE(std::is_sorted(few.begin(), few.end()));
}

TEST(LossPlanTest, WeightsPerReduction) {
  const std::vector<std::vector<TokenId>> seqs = {{1, 2, 3}, {4, 5}};
  const LossPlan tok = MakeLossPlan(seqs, LossReduction::kTokenMean);
  EXPECT_EQ(tok.targets, (std::vector<TokenId>{2, 3, 0, 5, 0}));
  const double third = 1.0 / 3.0;
  EXPECT_EQ(tok.weights, (std::vector<double>{third, third, 0.0, third, 0.0}));
  const LossPlan ex = MakeLossPlan(seqs, LossReduction::kExampleMean);
  EXPECT_EQ(ex.weights, (std::vector<double>{0.25, 0.25, 0.0, 0.5, 0.0}));
}

TEST(TrainableSequencesTest, DropsShortAndTruncates) {
  const EncodedCorpus c = {{1}, {1, 2}, {1, 2, 3, 4, 5}, {}};
  EXPECT_EQ(TrainableSequences(c, 3), (EncodedCorpus{{1, 2}, {1, 2, 3}}));
}

TEST(EvaluateTest, UniformModel) {
  // All-zero parameters give uniform predictions; argmax ties go to id 0.
  ModelParams<double> p(SmallConfig(8, 3));
  const EncodedCorpus split = {{1, 0, 2}, {3, 0}, {5}};
  const EvalResult r = Evaluate(p, split);
  EXPECT_EQ(r.tokens, 3);
  EXPECT_NEAR(r.nll, std::log(8.0), 1e-12);
  EXPECT_NEAR(r.accuracy, 100.0 * 2.0 / 3.0, 1e-12);
  EXPECT_THROW(Evaluate(p, EncodedCorpus{{4}}), DataError);
}

TEST(EvaluateTest, BatchSizeDoesNotMatter) {
  auto p = InitParams<double>(SmallConfig(20, 6, 0.0, 4));
  const auto split = testing::RandomSequences(30, 20, 1, 12, 8);
  const EvalResult a = Evaluate(p, split, 1), b = Evaluate(p, split, 128);
  EXPECT_NEAR(a.nll, b.nll, 1e-12);
  EXPECT_EQ(a.accuracy, b.accuracy);
}

// Tiny repetitive corpus the model can learn within one epoch.
EncodedCorpus PatternCorpus(int docs) {
  EncodedCorpus c;
  for (int i = 0; i < docs; ++i) c.push_back({1, 2, 3, 4, 5, 6, static_cast<TokenId>(7 + i % 3)});
  return c;
}

TEST(TrainEpochTest, LearnsAndIsDeterministic) {
  const auto cfg = SmallConfig(12, 16, 0.1, 2, 0.1);
  const auto init = InitParams<float>(cfg);
  TrainConfig tc;
  tc.max_lr = 0.02;
  tc.batch_size = 8;
  tc.dropout = 0.1;
  tc.seed = 9;
  const auto train = PatternCorpus(800), valid = PatternCorpus(40);
  const double before = Evaluate(init, valid).nll;
  auto a = TrainEpoch(init, train, valid, tc);
  auto b = TrainEpoch(init, train, valid, tc);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.best.flat(), b.best.flat());
  EXPECT_EQ(a.report.steps, 100);
  EXPECT_EQ(a.report.valid_nll.size(), 16u);
  EXPECT_LT(a.report.valid_nll.back(), before - 1.0);
  // Best checkpoint is the earliest minimum and is what Evaluate reports.
  const auto& nll = a.report.valid_nll;
  const auto best = std::min_element(nll.begin(), nll.end()) - nll.begin();
  EXPECT_EQ(a.report.selected, best);
  EXPECT_NEAR(Evaluate(a.best, valid).nll, nll[best], 1e-12);
}

TEST(TrainEpochTest, HooksSeeEveryStep) {
  const auto cfg = SmallConfig(12, 4, 0.0);
  TrainConfig tc;
  tc.dropout = 0.0;
  tc.batch_size = 16;
  std::vector<std::int64_t> steps, evals;
  TrainHooks<double> hooks;
  hooks.on_step = [&](std::int64_t s, const ModelParams<double>&) { steps.push_back(s); };
  hooks.on_eval = [&](std::int64_t s, double) { evals.push_back(s); };
  auto r = TrainEpoch(InitParams<double>(cfg), PatternCorpus(64), PatternCorpus(4), tc, hooks);
  EXPECT_EQ(steps, (std::vector<std::int64_t>{1, 2, 3, 4}));
  EXPECT_EQ(evals.size(), 16u);
  EXPECT_EQ(r.report.train_loss.size(), 4u);
}

TEST(TrainEpochTest, RejectsMismatchedDropout) {
  TrainConfig tc;
  tc.dropout = 0.2;
  EXPECT_THROW(TrainEpoch(InitParams<double>(SmallConfig(12, 4, 0.1)), PatternCorpus(4),
                          PatternCorpus(2), tc),
               ConfigError);
}

TEST(TrainEpochTest, L2ShrinksWeights) {
  const auto cfg = SmallConfig(12, 8, 0.0, 3, 0.3);
  TrainConfig tc;
  tc.dropout = 0.0;
  tc.batch_size = 8;
  tc.max_lr = 0.01;
  const auto init = InitParams<double>(cfg);
  auto plain = TrainEpoch(init, PatternCorpus(400), PatternCorpus(8), tc);
  tc.l2_lambda = 1.0;
  auto decayed = TrainEpoch(init, PatternCorpus(400), PatternCorpus(8), tc);
  EXPECT_LT(decayed.best.flat().norm(), plain.best.flat().norm());
}

}  // namespace
}  // namespace memlab
