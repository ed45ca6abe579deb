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

#include "memlab/model.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "memlab/error.h"
#include "test_util.h"

namespace memlab {
namespace {

using testing::RelErr;
using testing::SmallConfig;

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Plain-loop reference for the two-layer LSTM in evaluation mode.
std::vector<std::vector<double>> ReferenceLogits(const ModelParams<double>& p,
                                                 const std::vector<TokenId>& seq) {
  const int h = p.config().hidden_size, V = p.config().vocab_size;
  auto E = p.tensor(Tensor::kEmbedding);
  const Tensor w_in[2] = {Tensor::kInput0, Tensor::kInput1};
  const Tensor w_hid[2] = {Tensor::kHidden0, Tensor::kHidden1};
  const Tensor bias[2] = {Tensor::kBias0, Tensor::kBias1};
  std::vector<std::vector<double>> hid(2, std::vector<double>(h, 0.0)), cell = hid;
  std::vector<std::vector<double>> out;
  for (TokenId tok : seq) {
    std::vector<double> x(h);
    for (int j = 0; j < h; ++j) x[j] = E(tok, j);
    for (int l = 0; l < 2; ++l) {
      auto Wi = p.tensor(w_in[l]), Wh = p.tensor(w_hid[l]), b = p.tensor(bias[l]);
      std::vector<double> z(4 * h);
      for (int r = 0; r < 4 * h; ++r) {
        double s = b(r, 0);
        for (int j = 0; j < h; ++j) s += Wi(r, j) * x[j] + Wh(r, j) * hid[l][j];
        z[r] = s;
      }
      for (int j = 0; j < h; ++j) {
        const double i = Sigmoid(z[j]), f = Sigmoid(z[h + j]), g = std::tanh(z[2 * h + j]),
                     o = Sigmoid(z[3 * h + j]);
        cell[l][j] = f * cell[l][j] + i * g;
        hid[l][j] = o * std::tanh(cell[l][j]);
      }
      x = hid[l];
    }
    auto W = p.tensor(Tensor::kOutputWeight), bo = p.tensor(Tensor::kOutputBias);
    std::vector<double> logits(V);
    for (int v = 0; v < V; ++v) {
      double s = bo(v, 0);
      for (int j = 0; j < h; ++j) s += x[j] * W(j, v);
      logits[v] = s;
    }
    out.push_back(logits);
  }
  return out;
}

TEST(ModelConfigTest, RejectsInvalid) {
  EXPECT_THROW(SmallConfig(0, 4).Validate(), ConfigError);
  EXPECT_THROW(SmallConfig(10, 0).Validate(), ConfigError);
  EXPECT_THROW(SmallConfig(10, 4, 1.0).Validate(), ConfigError);
  EXPECT_NO_THROW(SmallConfig(10, 4, 0.5).Validate());
}

TEST(ModelTest, LayoutIsContiguous) {
  const auto layout = TensorLayout(SmallConfig(7, 3));
  ASSERT_EQ(layout.size(), static_cast<size_t>(kNumTensors));
  Eigen::Index offset = 0;
  for (const auto& s : layout) {
    EXPECT_EQ(s.offset, offset) << s.name;
    offset += s.size();
  }
  EXPECT_EQ(offset, ParameterCount(SmallConfig(7, 3)));
  EXPECT_EQ(layout[0].rows, 7);
  EXPECT_EQ(layout[1].rows, 12);
}

TEST(ModelTest, ParameterCountFormula) {
  // V*h (embedding) + per layer 2*4h*h + 4h + h*V + V.
  for (int V : {5, 100}) {
    for (int h : {1, 8, 33}) {
      const std::int64_t expect =
          std::int64_t{V} * h + 2 * (8LL * h * h + 4LL * h) + std::int64_t{h} * V + V;
      EXPECT_EQ(ParameterCount(SmallConfig(V, h)), expect);
    }
  }
}

TEST(ModelTest, FullScaleModelSizes) {
  const std::pair<int, double> cases[] = {{256, 14e6}, {384, 22e6}, {512, 30e6}};
  for (auto [h, millions] : cases) {
    const double n = static_cast<double>(ParameterCount(SmallConfig(25000, h)));
    EXPECT_EQ(std::round(n / 1e6) * 1e6, millions) << h;
  }
}

TEST(ModelTest, InitIsDeterministicAndBounded) {
  auto c = SmallConfig(20, 6, 0.0, 9, 0.08);
  auto a = InitParams<double>(c), b = InitParams<double>(c);
  EXPECT_EQ(a.flat(), b.flat());
  EXPECT_LE(a.flat().cwiseAbs().maxCoeff(), 0.08);
  c.seed = 10;
  EXPECT_NE(InitParams<double>(c).flat(), a.flat());
}

TEST(ModelTest, ForwardMatchesPlainLoopReference) {
  auto p = InitParams<double>(SmallConfig(11, 3, 0.0, 4));
  const std::vector<TokenId> seq = {3, 7, 0, 10, 3};
  SequenceBatch batch{{seq, {1, 2}}, {}};
  auto fr = Forward(p, batch, Mode::kEval, 0);
  const auto ref = ReferenceLogits(p, seq);
  for (size_t t = 0; t < seq.size(); ++t)
    for (int v = 0; v < 11; ++v) EXPECT_NEAR(fr.logits(t, v), ref[t][v], 1e-12);
}

TEST(ModelTest, PackingDoesNotMixSequences) {
  auto p = InitParams<double>(SmallConfig(13, 4, 0.0, 2));
  const auto seqs = testing::RandomSequences(5, 13, 1, 9, 3);
  auto together = Forward(p, SequenceBatch{seqs, {}}, Mode::kEval, 0);
  Eigen::Index row = 0;
  for (const auto& s : seqs) {
    auto alone = Forward(p, SequenceBatch{{s}, {}}, Mode::kEval, 0);
    for (Eigen::Index r = 0; r < alone.logits.rows(); ++r, ++row)
      EXPECT_LT((alone.logits.row(r) - together.logits.row(row)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ModelTest, StepMatchesForward) {
  auto p = InitParams<double>(SmallConfig(9, 5, 0.0, 5));
  const std::vector<TokenId> seq = {1, 8, 2, 2, 0};
  auto fr = Forward(p, SequenceBatch{{seq}, {}}, Mode::kEval, 0);
  auto state = InitialState<double>(p.config());
  for (size_t t = 0; t < seq.size(); ++t) {
    auto logits = Step(p, state, seq[t]);
    EXPECT_LT((logits.transpose() - fr.logits.row(t)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ModelTest, CrossEntropyMatchesHandComputation) {
  ParamStore<double>::Matrix logits(2, 3);
  logits << 1.0, 2.0, 3.0, 0.5, -1.0, 0.0;
  const std::vector<TokenId> targets = {2, 1};
  auto r = CrossEntropy<double>(logits, targets);
  const double ce0 = -3.0 + std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  const double ce1 = 1.0 + std::log(std::exp(0.5) + std::exp(-1.0) + std::exp(0.0));
  EXPECT_NEAR(r.loss, (ce0 + ce1) / 2, 1e-14);
  // d/dz of mean CE = (softmax - onehot) / rows.
  const double z0 = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(r.dlogits(0, 0), std::exp(1.0) / z0 / 2, 1e-14);
  EXPECT_NEAR(r.dlogits(0, 2), (std::exp(3.0) / z0 - 1.0) / 2, 1e-14);

  const std::vector<double> w = {0.0, 3.0};
  auto rw = CrossEntropy<double>(logits, targets, w);
  EXPECT_NEAR(rw.loss, 3.0 * ce1, 1e-13);
  EXPECT_EQ(rw.dlogits.row(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ModelTest, CrossEntropyIsStableForHugeLogits) {
  ParamStore<double>::Matrix logits(1, 2);
  logits << 1000.0, -1000.0;
  auto r = CrossEntropy<double>(logits, std::vector<TokenId>{1});
  EXPECT_NEAR(r.loss, 2000.0, 1e-9);
}

TEST(ModelTest, LogSoftmaxNormalizes) {
  const std::vector<double> z = {3.0, -2.0, 700.0, 0.0};
  auto ls = LogSoftmax(z);
  double total = 0.0;
  for (double v : ls) total += std::exp(v);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(ls[2], 0.0, 1e-12);
}

TEST(ModelTest, PredictNextSumsToOne) {
  auto p = InitParams<double>(SmallConfig(17, 4, 0.0, 8));
  const std::vector<TokenId> prefix = {4, 2, 16};
  auto probs = PredictNext(p, prefix);
  double total = 0.0;
  for (double v : probs) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_THROW(PredictNext(p, std::span<const TokenId>{}), DataError);
}

TEST(ModelTest, RejectsOutOfRangeTokens) {
  auto p = InitParams<double>(SmallConfig(5, 2));
  EXPECT_THROW(Forward(p, SequenceBatch{{{1, 5}}, {}}, Mode::kEval, 0), DataError);
  EXPECT_THROW(Forward(p, SequenceBatch{{{}}, {}}, Mode::kEval, 0), DataError);
}

TEST(ModelTest, BackwardRejectsStaleCache) {
  auto p = InitParams<double>(SmallConfig(6, 2));
  SequenceBatch b{{{1, 2, 3}}, {}};
  auto fr = Forward(p, b, Mode::kEval, 0);
  auto dl = fr.logits;
  dl.setOnes();
  p.mutable_flat()[0] += 1.0;
  EXPECT_THROW(Backward(fr.cache, p, dl), DataError);
  auto fr2 = Forward(p, b, Mode::kEval, 0);
  Backward(fr2.cache, p, dl);
  EXPECT_THROW(Backward(fr2.cache, p, dl), DataError);
}

// Central differences against the analytic gradient, in both modes (train
// mode with a fixed dropout seed is a deterministic function too).
void GradCheck(Mode mode, double dropout) {
  auto p = InitParams<double>(SmallConfig(50, 8, dropout, 3));
  SequenceBatch b{testing::RandomSequences(4, 50, 2, 9, 11), {}};
  auto fr = Forward(p, b, mode, 7);
  const LossPlan plan = MakeLossPlan(b.sequences, LossReduction::kTokenMean);
  auto loss = CrossEntropy<double>(fr.logits, plan.targets, plan.weights);
  auto grad = Backward(fr.cache, p, loss.dlogits);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Eigen::Index> pick(0, p.size() - 1);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index i = pick(rng);
    auto q = p;
    q.mutable_flat()[i] += 1e-4;
    const double up = testing::BatchLoss(q, b, mode, 7);
    q.mutable_flat()[i] -= 2e-4;
    const double down = testing::BatchLoss(q, b, mode, 7);
    worst = std::max(worst, RelErr((up - down) / 2e-4, grad.flat()[i], 1e-7));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(ModelTest, GradientMatchesFiniteDifferencesEval) { GradCheck(Mode::kEval, 0.0); }
TEST(ModelTest, GradientMatchesFiniteDifferencesWithDropout) { GradCheck(Mode::kTrain, 0.3); }

TEST(ModelTest, PerSequenceGradientsSumToBatchGradient) {
  auto p = InitParams<double>(SmallConfig(12, 4, 0.2, 6));
  SequenceBatch b{testing::RandomSequences(5, 12, 2, 7, 2), {10, 11, 12, 13, 14}};
  auto fr = Forward(p, b, Mode::kTrain, 3);
  const LossPlan plan = MakeLossPlan(b.sequences, LossReduction::kTokenMean);
  auto loss = CrossEntropy<double>(fr.logits, plan.targets, plan.weights);
  auto fr2 = fr;
  auto whole = Backward(fr.cache, p, loss.dlogits);

  Gradients<double> scratch(p.config()), sum(p.config());
  const auto emb = p.slot(Tensor::kEmbedding);
  BackwardPerSequence<double>(
      fr2.cache, p, loss.dlogits, scratch,
      [&](int, const Gradients<double>& g, std::span<const TokenId> rows) {
        auto& s = sum.mutable_flat();
        s.tail(p.size() - emb.size()) += g.flat().tail(p.size() - emb.size());
        for (TokenId r : rows)
          s.segment(r * emb.cols, emb.cols) += g.flat().segment(r * emb.cols, emb.cols);
      });
  EXPECT_LT((sum.flat() - whole.flat()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ModelTest, DropoutMasksFollowKeysNotBatching) {
  auto p = InitParams<double>(SmallConfig(10, 6, 0.5, 1));
  const auto seqs = testing::RandomSequences(3, 10, 3, 5, 9);
  auto together = Forward(p, SequenceBatch{seqs, {7, 8, 9}}, Mode::kTrain, 42);
  auto alone = Forward(p, SequenceBatch{{seqs[1]}, {8}}, Mode::kTrain, 42);
  const Eigen::Index start = together.cache.row_start[1];
  for (Eigen::Index r = 0; r < alone.logits.rows(); ++r)
    EXPECT_LT((alone.logits.row(r) - together.logits.row(start + r)).cwiseAbs().maxCoeff(),
              1e-12);
  auto other = Forward(p, SequenceBatch{{seqs[1]}, {99}}, Mode::kTrain, 42);
  EXPECT_GT((other.logits - alone.logits).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ModelTest, FloatAndDoubleAgree) {
  auto pd = InitParams<double>(SmallConfig(30, 8, 0.0, 2, 0.1));
  auto pf = CastParams<float>(pd);
  SequenceBatch b{testing::RandomSequences(3, 30, 4, 8, 1), {}};
  auto fd = Forward(pd, b, Mode::kEval, 0);
  auto ff = Forward(pf, b, Mode::kEval, 0);
  EXPECT_LT((fd.logits - ff.logits.cast<double>()).cwiseAbs().maxCoeff(), 1e-5);
}

}  // namespace
}  // namespace memlab
