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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "memlab/error.h"
#include "memlab/random.h"

namespace memlab {
namespace {

template <typename Scalar>
using Mat = typename ParamStore<Scalar>::Matrix;
template <typename Scalar>
using RowVecMap = Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>;

template <typename Scalar>
RowVecMap<Scalar> BiasRow(const ModelParams<Scalar>& p, Tensor t) {
  const TensorSlot& s = p.slot(t);
  return RowVecMap<Scalar>(p.flat().data() + s.offset, s.size());
}

constexpr Tensor kInputW[] = {Tensor::kInput0, Tensor::kInput1};
constexpr Tensor kHiddenW[] = {Tensor::kHidden0, Tensor::kHidden1};
constexpr Tensor kBias[] = {Tensor::kBias0, Tensor::kBias1};

template <typename Derived>
auto Sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return (S(1) + (-x).exp()).inverse();
}

// Recurrence of one LSTM layer over the packed batch. layer.input must be
// filled; everything else is produced here.
template <typename Scalar>
void RunLayer(const ModelParams<Scalar>& params, int l, ForwardCache<Scalar>& cache) {
  auto& layer = cache.layers[l];
  const Eigen::Index h = params.config().hidden_size;
  const Eigen::Index n_rows = cache.rows();
  const auto w_in = params.tensor(kInputW[l]);
  const auto w_hid = params.tensor(kHiddenW[l]);

  layer.gates.resize(n_rows, 4 * h);
  layer.gates.noalias() = layer.input * w_in.transpose();
  layer.gates.rowwise() += BiasRow(params, kBias[l]);
  layer.prev_hidden.resize(n_rows, h);
  layer.prev_cell.resize(n_rows, h);
  layer.cell.resize(n_rows, h);
  layer.tanh_cell.resize(n_rows, h);
  layer.hidden.resize(n_rows, h);

  const Eigen::Index n_seq = static_cast<Eigen::Index>(cache.length.size());
  Mat<Scalar> state_h = Mat<Scalar>::Zero(n_seq, h);
  Mat<Scalar> state_c = Mat<Scalar>::Zero(n_seq, h);
  Mat<Scalar> recur(n_seq, 4 * h);

  for (std::size_t t = 0; t < cache.active.size(); ++t) {
    const Eigen::Index n = cache.active[t];
    recur.topRows(n).noalias() = state_h.topRows(n) * w_hid.transpose();
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index r = cache.row_start[cache.by_length[k]] + t;
      layer.prev_hidden.row(r) = state_h.row(k);
      layer.prev_cell.row(r) = state_c.row(k);
      auto z = layer.gates.row(r);
      z += recur.row(k);
      z.segment(0, 2 * h) = Sigmoid(z.segment(0, 2 * h).array()).matrix();
      z.segment(2 * h, h) = z.segment(2 * h, h).array().tanh().matrix();
      z.segment(3 * h, h) = Sigmoid(z.segment(3 * h, h).array()).matrix();
      auto c = layer.cell.row(r);
      c = (z.segment(h, h).array() * state_c.row(k).array() +
           z.segment(0, h).array() * z.segment(2 * h, h).array())
              .matrix();
      layer.tanh_cell.row(r) = c.array().tanh().matrix();
      layer.hidden.row(r) =
          (z.segment(3 * h, h).array() * layer.tanh_cell.row(r).array()).matrix();
      state_h.row(k) = layer.hidden.row(r);
      state_c.row(k) = c;
    }
  }
}

// Backpropagates d(loss)/d(hidden) of one layer to gate pre-activations.
template <typename Scalar>
Mat<Scalar> LayerBackward(const ModelParams<Scalar>& params, int l,
                          const ForwardCache<Scalar>& cache,
                          const Mat<Scalar>& d_hidden) {
  const auto& layer = cache.layers[l];
  const Eigen::Index h = params.config().hidden_size;
  const Eigen::Index n_seq = static_cast<Eigen::Index>(cache.length.size());
  const auto w_hid = params.tensor(kHiddenW[l]);

  Mat<Scalar> dz(cache.rows(), 4 * h);
  Mat<Scalar> state_dh = Mat<Scalar>::Zero(n_seq, h);
  Mat<Scalar> state_dc = Mat<Scalar>::Zero(n_seq, h);
  Mat<Scalar> packed(n_seq, 4 * h);
  Eigen::Array<Scalar, 1, Eigen::Dynamic> dh(h), dc(h);

  for (std::size_t ti = cache.active.size(); ti-- > 0;) {
    const Eigen::Index n = cache.active[ti];
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index r = cache.row_start[cache.by_length[k]] + ti;
      const auto g = layer.gates.row(r).array();
      const auto i_g = g.segment(0, h);
      const auto f_g = g.segment(h, h);
      const auto c_g = g.segment(2 * h, h);
      const auto o_g = g.segment(3 * h, h);
      const auto tc = layer.tanh_cell.row(r).array();

      dh = d_hidden.row(r).array() + state_dh.row(k).array();
      dc = state_dc.row(k).array() + dh * o_g * (Scalar(1) - tc.square());
      auto out = dz.row(r).array();
      out.segment(0, h) = dc * c_g * i_g * (Scalar(1) - i_g);
      out.segment(h, h) = dc * layer.prev_cell.row(r).array() * f_g * (Scalar(1) - f_g);
      out.segment(2 * h, h) = dc * i_g * (Scalar(1) - c_g.square());
      out.segment(3 * h, h) = dh * tc * o_g * (Scalar(1) - o_g);
      state_dc.row(k) = (dc * f_g).matrix();
      packed.row(k) = dz.row(r);
    }
    state_dh.topRows(n).noalias() = packed.topRows(n) * w_hid;
  }
  return dz;
}

template <typename Scalar>
void CheckCache(const ForwardCache<Scalar>& cache, const ModelParams<Scalar>& params) {
  if (cache.consumed) throw DataError("forward cache already consumed");
  if (cache.params_id != params.id() ||
      cache.params_generation != params.generation()) {
    throw DataError("stale forward cache: parameters changed since forward");
  }
}

// Activation gradients shared by both backward flavours.
template <typename Scalar>
struct ActivationGrads {
  Mat<Scalar> dz[ModelConfig::kLayers];
  Mat<Scalar> d_embed;  // d(loss)/d(embedding rows), per position
};

template <typename Scalar>
ActivationGrads<Scalar> BackwardActivations(const ForwardCache<Scalar>& cache,
                                            const ModelParams<Scalar>& params,
                                            const Mat<Scalar>& dlogits) {
  const int vocab = params.config().vocab_size;
  if (dlogits.rows() != cache.rows() || dlogits.cols() != vocab)
    throw DataError("dlogits shape does not match forward cache");
  ActivationGrads<Scalar> g;
  Mat<Scalar> d_hidden = dlogits * params.tensor(Tensor::kOutputWeight).transpose();
  if (cache.out_mask.size()) d_hidden.array() *= cache.out_mask.array();
  g.dz[1] = LayerBackward(params, 1, cache, d_hidden);
  d_hidden.noalias() = g.dz[1] * params.tensor(Tensor::kInput1);
  if (cache.mid_mask.size()) d_hidden.array() *= cache.mid_mask.array();
  g.dz[0] = LayerBackward(params, 0, cache, d_hidden);
  g.d_embed.noalias() = g.dz[0] * params.tensor(Tensor::kInput0);
  if (cache.embed_mask.size()) g.d_embed.array() *= cache.embed_mask.array();
  return g;
}

}  // namespace

void ModelConfig::Validate() const {
  if (vocab_size < 1) throw ConfigError("vocab_size must be positive");
  if (hidden_size < 1) throw ConfigError("hidden_size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (max_seq_len < 1) throw ConfigError("max_seq_len must be positive");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale))
    throw ConfigError("init_scale must be finite and non-negative");
}

std::vector<TensorSlot> TensorLayout(const ModelConfig& c) {
  const Eigen::Index v = c.vocab_size, h = c.hidden_size;
  std::vector<TensorSlot> slots = {
      {"embedding", v, h},       {"lstm0.w_input", 4 * h, h},
      {"lstm0.w_hidden", 4 * h, h}, {"lstm0.bias", 4 * h, 1},
      {"lstm1.w_input", 4 * h, h},  {"lstm1.w_hidden", 4 * h, h},
      {"lstm1.bias", 4 * h, 1},     {"output.weight", h, v},
      {"output.bias", v, 1}};
  Eigen::Index offset = 0;
  for (auto& s : slots) {
    s.offset = offset;
    offset += s.size();
  }
  return slots;
}

std::int64_t ParameterCount(const ModelConfig& c) {
  std::int64_t n = 0;
  for (const auto& s : TensorLayout(c)) n += s.size();
  return n;
}

template <typename Scalar>
std::uint64_t ParamStore<Scalar>::NextId() {
  static std::atomic<std::uint64_t> next{1};
  return next++;
}

template <typename Scalar>
ParamStore<Scalar>::ParamStore(const ModelConfig& config)
    : config_(config), layout_(TensorLayout(config)) {
  config_.Validate();
  data_ = Vector::Zero(ParameterCount(config));
}

template <typename Scalar>
ParamStore<Scalar>::ParamStore(const ParamStore& other)
    : config_(other.config_), layout_(other.layout_), data_(other.data_) {}

template <typename Scalar>
ParamStore<Scalar>& ParamStore<Scalar>::operator=(const ParamStore& other) {
  if (this != &other) {
    config_ = other.config_;
    layout_ = other.layout_;
    data_ = other.data_;
    Touch();
  }
  return *this;
}

template <typename Scalar>
typename ParamStore<Scalar>::ConstMatrixMap ParamStore<Scalar>::tensor(Tensor t) const {
  const TensorSlot& s = slot(t);
  return ConstMatrixMap(data_.data() + s.offset, s.rows, s.cols);
}

template <typename Scalar>
typename ParamStore<Scalar>::MatrixMap ParamStore<Scalar>::mutable_tensor(Tensor t) {
  Touch();
  const TensorSlot& s = slot(t);
  return MatrixMap(data_.data() + s.offset, s.rows, s.cols);
}

template <typename Scalar>
const TensorSlot& ParamStore<Scalar>::slot(std::string_view name) const {
  for (const auto& s : layout_)
    if (s.name == name) return s;
  throw DataError("no tensor named '" + std::string(name) + "'");
}

template <typename Scalar>
ModelParams<Scalar> InitParams(const ModelConfig& config) {
  ModelParams<Scalar> p(config);
  Rng rng(DeriveSeed(config.seed, Stream::kInit));
  std::uniform_real_distribution<double> u(-config.init_scale, config.init_scale);
  auto& flat = p.mutable_flat();
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = static_cast<Scalar>(u(rng));
  return p;
}

template <typename Scalar>
ForwardResult<Scalar> Forward(const ModelParams<Scalar>& params,
                              const SequenceBatch& batch, Mode mode,
                              std::uint64_t dropout_seed) {
  const ModelConfig& cfg = params.config();
  const Eigen::Index h = cfg.hidden_size;
  const int n_seq = static_cast<int>(batch.sequences.size());
  if (n_seq == 0) throw DataError("empty batch");
  if (!batch.dropout_keys.empty() &&
      batch.dropout_keys.size() != batch.sequences.size())
    throw DataError("dropout_keys size does not match batch");

  ForwardResult<Scalar> out;
  ForwardCache<Scalar>& cache = out.cache;
  cache.params_id = params.id();
  cache.params_generation = params.generation();
  cache.length.resize(n_seq);
  cache.row_start.resize(n_seq);
  Eigen::Index rows = 0;
  int max_len = 0;
  for (int b = 0; b < n_seq; ++b) {
    const int len = std::min<int>(static_cast<int>(batch.sequences[b].size()),
                                  cfg.max_seq_len);
    if (len == 0) throw DataError("empty sequence in batch");
    cache.length[b] = len;
    cache.row_start[b] = rows;
    rows += len;
    max_len = std::max(max_len, len);
  }
  cache.by_length.resize(n_seq);
  std::iota(cache.by_length.begin(), cache.by_length.end(), 0);
  std::stable_sort(cache.by_length.begin(), cache.by_length.end(),
                   [&](int a, int b) { return cache.length[a] > cache.length[b]; });
  cache.active.assign(max_len, 0);
  for (int len : cache.length)
    for (int t = 0; t < len; ++t) ++cache.active[t];

  cache.ids.reserve(rows);
  for (int b = 0; b < n_seq; ++b) {
    for (int t = 0; t < cache.length[b]; ++t) {
      const TokenId id = batch.sequences[b][t];
      if (id < 0 || id >= cfg.vocab_size)
        throw DataError("token id " + std::to_string(id) + " out of range [0, " +
                        std::to_string(cfg.vocab_size) + ")");
      cache.ids.push_back(id);
    }
  }

  const double p = mode == Mode::kTrain ? cfg.dropout : 0.0;
  if (p > 0.0) {
    const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - p));
    cache.embed_mask.resize(rows, h);
    cache.mid_mask.resize(rows, h);
    cache.out_mask.resize(rows, h);
    std::bernoulli_distribution keep(1.0 - p);
    for (int b = 0; b < n_seq; ++b) {
      const std::uint64_t key = batch.dropout_keys.empty()
                                    ? static_cast<std::uint64_t>(b)
                                    : batch.dropout_keys[b];
      Rng rng(DeriveSeed(dropout_seed, key));
      for (Mat<Scalar>* m : {&cache.embed_mask, &cache.mid_mask, &cache.out_mask}) {
        auto block = m->middleRows(cache.row_start[b], cache.length[b]);
        for (Eigen::Index i = 0; i < block.rows(); ++i)
          for (Eigen::Index j = 0; j < h; ++j)
            block(i, j) = keep(rng) ? keep_scale : Scalar(0);
      }
    }
  }

  const auto emb = params.tensor(Tensor::kEmbedding);
  auto& in0 = cache.layers[0].input;
  in0.resize(rows, h);
  for (Eigen::Index r = 0; r < rows; ++r) in0.row(r) = emb.row(cache.ids[r]);
  if (p > 0.0) in0.array() *= cache.embed_mask.array();
  RunLayer(params, 0, cache);

  cache.layers[1].input = cache.layers[0].hidden;
  if (p > 0.0) cache.layers[1].input.array() *= cache.mid_mask.array();
  RunLayer(params, 1, cache);

  cache.top = cache.layers[1].hidden;
  if (p > 0.0) cache.top.array() *= cache.out_mask.array();

  out.logits.resize(rows, cfg.vocab_size);
  out.logits.noalias() = cache.top * params.tensor(Tensor::kOutputWeight);
  out.logits.rowwise() += BiasRow(params, Tensor::kOutputBias);
  return out;
}

template <typename Scalar>
LossResult<Scalar> CrossEntropy(const Mat<Scalar>& logits,
                                std::span<const TokenId> targets,
                                std::span<const double> weights) {
  const Eigen::Index n = logits.rows();
  if (static_cast<Eigen::Index>(targets.size()) != n ||
      static_cast<Eigen::Index>(weights.size()) != n)
    throw DataError("targets/weights do not match logits rows");
  LossResult<Scalar> out;
  out.dlogits.resize(n, logits.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const TokenId t = targets[r];
    if (t < 0 || t >= logits.cols()) throw DataError("target id out of range");
    const Scalar m = logits.row(r).maxCoeff();
    auto d = out.dlogits.row(r);
    d = (logits.row(r).array() - m).exp().matrix();
    const double sum = static_cast<double>(d.sum());
    const double lse = static_cast<double>(m) + std::log(sum);
    total += weights[r] * (lse - static_cast<double>(logits(r, t)));
    d *= static_cast<Scalar>(weights[r] / sum);
    d(t) -= static_cast<Scalar>(weights[r]);
  }
  out.loss = total;
  return out;
}

template <typename Scalar>
LossResult<Scalar> CrossEntropy(const Mat<Scalar>& logits,
                                std::span<const TokenId> targets) {
  if (logits.rows() == 0) throw DataError("cross-entropy over zero positions");
  std::vector<double> w(logits.rows(), 1.0 / static_cast<double>(logits.rows()));
  return CrossEntropy<Scalar>(logits, targets, w);
}

template <typename Scalar>
Gradients<Scalar> Backward(ForwardCache<Scalar>& cache,
                           const ModelParams<Scalar>& params,
                           const Mat<Scalar>& dlogits) {
  CheckCache(cache, params);
  const ActivationGrads<Scalar> a = BackwardActivations(cache, params, dlogits);
  cache.consumed = true;

  Gradients<Scalar> g(params.config());
  g.mutable_tensor(Tensor::kOutputWeight).noalias() = cache.top.transpose() * dlogits;
  g.mutable_tensor(Tensor::kOutputBias) = dlogits.colwise().sum().transpose();
  for (int l = 0; l < ModelConfig::kLayers; ++l) {
    const auto& layer = cache.layers[l];
    g.mutable_tensor(kInputW[l]).noalias() = a.dz[l].transpose() * layer.input;
    g.mutable_tensor(kHiddenW[l]).noalias() = a.dz[l].transpose() * layer.prev_hidden;
    g.mutable_tensor(kBias[l]) = a.dz[l].colwise().sum().transpose();
  }
  auto emb = g.mutable_tensor(Tensor::kEmbedding);
  for (Eigen::Index r = 0; r < cache.rows(); ++r) emb.row(cache.ids[r]) += a.d_embed.row(r);
  return g;
}

template <typename Scalar>
void BackwardPerSequence(ForwardCache<Scalar>& cache,
                         const ModelParams<Scalar>& params,
                         const Mat<Scalar>& dlogits, Gradients<Scalar>& scratch,
                         const SequenceGradientSink<Scalar>& sink) {
  CheckCache(cache, params);
  const ActivationGrads<Scalar> a = BackwardActivations(cache, params, dlogits);
  cache.consumed = true;
  if (scratch.size() != params.size() || !(scratch.config() == params.config()))
    scratch = Gradients<Scalar>(params.config());

  auto emb = scratch.mutable_tensor(Tensor::kEmbedding);
  emb.setZero();
  auto out_w = scratch.mutable_tensor(Tensor::kOutputWeight);
  auto out_b = scratch.mutable_tensor(Tensor::kOutputBias);
  std::vector<TokenId> touched;
  for (std::size_t b = 0; b < cache.length.size(); ++b) {
    for (TokenId id : touched) emb.row(id).setZero();
    const Eigen::Index s = cache.row_start[b];
    const Eigen::Index len = cache.length[b];
    const auto dl = dlogits.middleRows(s, len);
    out_w.noalias() = cache.top.middleRows(s, len).transpose() * dl;
    out_b = dl.colwise().sum().transpose();
    for (int l = 0; l < ModelConfig::kLayers; ++l) {
      const auto& layer = cache.layers[l];
      const auto dz = a.dz[l].middleRows(s, len);
      scratch.mutable_tensor(kInputW[l]).noalias() =
          dz.transpose() * layer.input.middleRows(s, len);
      scratch.mutable_tensor(kHiddenW[l]).noalias() =
          dz.transpose() * layer.prev_hidden.middleRows(s, len);
      scratch.mutable_tensor(kBias[l]) = dz.colwise().sum().transpose();
    }
    touched.assign(cache.ids.begin() + s, cache.ids.begin() + s + len);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (Eigen::Index r = s; r < s + len; ++r) emb.row(cache.ids[r]) += a.d_embed.row(r);
    sink(static_cast<int>(b), scratch, touched);
  }
}

template <typename Scalar>
LstmState<Scalar> InitialState(const ModelConfig& config) {
  LstmState<Scalar> s;
  for (int l = 0; l < ModelConfig::kLayers; ++l) {
    s.hidden[l] = LstmState<Scalar>::Vector::Zero(config.hidden_size);
    s.cell[l] = LstmState<Scalar>::Vector::Zero(config.hidden_size);
  }
  return s;
}

template <typename Scalar>
typename ParamStore<Scalar>::Vector Step(const ModelParams<Scalar>& params,
                                         LstmState<Scalar>& state, TokenId token) {
  using Vector = typename ParamStore<Scalar>::Vector;
  const ModelConfig& cfg = params.config();
  if (token < 0 || token >= cfg.vocab_size)
    throw DataError("token id " + std::to_string(token) + " out of range");
  const Eigen::Index h = cfg.hidden_size;
  Vector x = params.tensor(Tensor::kEmbedding).row(token).transpose();
  for (int l = 0; l < ModelConfig::kLayers; ++l) {
    Vector z = params.tensor(kInputW[l]) * x;
    z.noalias() += params.tensor(kHiddenW[l]) * state.hidden[l];
    z += BiasRow(params, kBias[l]).transpose();
    const auto i_g = Sigmoid(z.segment(0, h).array()).eval();
    const auto f_g = Sigmoid(z.segment(h, h).array()).eval();
    const auto c_g = z.segment(2 * h, h).array().tanh().eval();
    const auto o_g = Sigmoid(z.segment(3 * h, h).array()).eval();
    state.cell[l] = (f_g * state.cell[l].array() + i_g * c_g).matrix();
    state.hidden[l] = (o_g * state.cell[l].array().tanh()).matrix();
    x = state.hidden[l];
  }
  Vector logits = params.tensor(Tensor::kOutputWeight).transpose() * x;
  logits += BiasRow(params, Tensor::kOutputBias).transpose();
  return logits;
}

std::vector<double> LogSoftmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - m);
  const double lse = m + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

template <typename Scalar>
std::vector<double> PredictNext(const ModelParams<Scalar>& params,
                                std::span<const TokenId> prefix) {
  if (prefix.empty()) throw DataError("PredictNext needs a non-empty prefix");
  auto state = InitialState<Scalar>(params.config());
  typename ParamStore<Scalar>::Vector logits;
  for (TokenId t : prefix) logits = Step(params, state, t);
  std::vector<double> lg(logits.data(), logits.data() + logits.size());
  std::vector<double> p = LogSoftmax(lg);
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

#define MEMLAB_INSTANTIATE_MODEL(S)                                              \
  template class ParamStore<S>;                                                  \
  template ModelParams<S> InitParams<S>(const ModelConfig&);                     \
  template ForwardResult<S> Forward<S>(const ModelParams<S>&,                    \
                                       const SequenceBatch&, Mode,               \
                                       std::uint64_t);                           \
  template LossResult<S> CrossEntropy<S>(const Mat<S>&, std::span<const TokenId>); \
  template LossResult<S> CrossEntropy<S>(const Mat<S>&, std::span<const TokenId>,  \
                                         std::span<const double>);               \
  template Gradients<S> Backward<S>(ForwardCache<S>&, const ModelParams<S>&,     \
                                    const Mat<S>&);                              \
  template void BackwardPerSequence<S>(ForwardCache<S>&, const ModelParams<S>&,  \
                                       const Mat<S>&, Gradients<S>&,             \
                                       const SequenceGradientSink<S>&);          \
  template LstmState<S> InitialState<S>(const ModelConfig&);                     \
  template ParamStore<S>::Vector Step<S>(const ModelParams<S>&, LstmState<S>&,   \
                                         TokenId);                               \
  template std::vector<double> PredictNext<S>(const ModelParams<S>&,             \
                                              std::span<const TokenId>);

MEMLAB_INSTANTIATE_MODEL(float)
MEMLAB_INSTANTIATE_MODEL(double)

#undef MEMLAB_INSTANTIATE_MODEL

}  // namespace memlab
