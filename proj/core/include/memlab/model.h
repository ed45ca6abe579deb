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

#ifndef MEMLAB_MODEL_H_
#define MEMLAB_MODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "memlab/vocabulary.h"

namespace memlab {

struct ModelConfig {
  static constexpr int kLayers = 2;

  int vocab_size = 0;
  // Embedding size equals hidden size.
  int hidden_size = 0;
  double dropout = 0.1;
  int max_seq_len = 512;
  double init_scale = 0.08;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Named tensors of the two-layer LSTM language model, in storage order:
//
//   embedding        [V x h]
//   lstm{l}.w_input  [4h x h]   gate rows ordered input, forget, cell, output
//   lstm{l}.w_hidden [4h x h]
//   lstm{l}.bias     [4h x 1]
//   output.weight    [h x V]
//   output.bias      [V x 1]
//
// All tensors are row-major slices of one contiguous buffer, so optimizers
// and norms can work on the flat vector directly.
enum class Tensor : int {
  kEmbedding = 0,
  kInput0,
  kHidden0,
  kBias0,
  kInput1,
  kHidden1,
  kBias1,
  kOutputWeight,
  kOutputBias,
};
inline constexpr int kNumTensors = 9;

struct TensorSlot {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;
  Eigen::Index size() const { return rows * cols; }
};

std::vector<TensorSlot> TensorLayout(const ModelConfig& config);
std::int64_t ParameterCount(const ModelConfig& config);

// Flat named-tensor store used for both parameters and gradients.
//
// Every mutable access bumps generation(); forward caches remember the
// generation they were computed at so backward can reject stale caches.
template <typename Scalar>
class ParamStore {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;

  ParamStore() = default;
  // Zero-filled store shaped for config.
  explicit ParamStore(const ModelConfig& config);
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  const ModelConfig& config() const { return config_; }
  const std::vector<TensorSlot>& layout() const { return layout_; }
  Eigen::Index size() const { return data_.size(); }

  const Vector& flat() const { return data_; }
  Vector& mutable_flat() {
    Touch();
    return data_;
  }

  ConstMatrixMap tensor(Tensor t) const;
  MatrixMap mutable_tensor(Tensor t);
  const TensorSlot& slot(Tensor t) const {
    return layout_[static_cast<int>(t)];
  }
  // Looks a tensor up by name; throws DataError if absent.
  const TensorSlot& slot(std::string_view name) const;

  std::uint64_t id() const { return id_; }
  std::uint64_t generation() const { return generation_; }
  void Touch() { ++generation_; }

  bool AllFinite() const { return data_.allFinite(); }

 private:
  ModelConfig config_;
  std::vector<TensorSlot> layout_;
  Vector data_;
  std::uint64_t id_ = NextId();
  std::uint64_t generation_ = 0;

  static std::uint64_t NextId();
};

template <typename Scalar>
using ModelParams = ParamStore<Scalar>;
template <typename Scalar>
using Gradients = ParamStore<Scalar>;

// Uniform initialization in [-init_scale, init_scale], deterministic per
// config.seed.
template <typename Scalar>
ModelParams<Scalar> InitParams(const ModelConfig& config);

// Converts between scalar types (e.g. a float-trained model to double).
template <typename To, typename From>
ParamStore<To> CastParams(const ParamStore<From>& from) {
  ParamStore<To> out(from.config());
  out.mutable_flat() = from.flat().template cast<To>();
  return out;
}

enum class Mode { kTrain, kEval };

// A batch of input token sequences. Each sequence is truncated to
// max_seq_len tokens. dropout_keys, when given, seed each sequence's dropout
// masks (together with the forward dropout seed), which makes masks
// independent of how sequences are grouped into batches.
struct SequenceBatch {
  std::vector<std::vector<TokenId>> sequences;
  std::vector<std::uint64_t> dropout_keys;
};

// Activations retained for backpropagation. Positions are packed
// sequence-major without padding: sequence b occupies rows
// [row_start[b], row_start[b] + length[b]).
template <typename Scalar>
struct ForwardCache {
  using Matrix = typename ParamStore<Scalar>::Matrix;

  std::uint64_t params_id = 0;
  std::uint64_t params_generation = 0;
  bool consumed = false;

  std::vector<int> length;
  std::vector<Eigen::Index> row_start;
  // Sequence indices sorted by decreasing length (stable).
  std::vector<int> by_length;
  // active[t] = number of sequences with length > t.
  std::vector<int> active;
  std::vector<TokenId> ids;

  // Inverted dropout masks (empty when dropout is off).
  Matrix embed_mask;
  Matrix mid_mask;
  Matrix out_mask;

  struct Layer {
    Matrix input;        // [N x h] after dropout
    Matrix prev_hidden;  // h_{t-1}
    Matrix prev_cell;    // c_{t-1}
    Matrix gates;        // post-activation i, f, g, o
    Matrix cell;         // c_t
    Matrix tanh_cell;    // tanh(c_t)
    Matrix hidden;       // h_t
  };
  Layer layers[ModelConfig::kLayers];
  Matrix top;  // input to the output projection, after dropout

  Eigen::Index rows() const { return static_cast<Eigen::Index>(ids.size()); }
};

template <typename Scalar>
struct ForwardResult {
  // [N x V] packed logits; row row_start[b] + t predicts token t+1 of b.
  typename ParamStore<Scalar>::Matrix logits;
  ForwardCache<Scalar> cache;
};

// Throws DataError for ids outside [0, V).
template <typename Scalar>
ForwardResult<Scalar> Forward(const ModelParams<Scalar>& params,
                              const SequenceBatch& batch, Mode mode,
                              std::uint64_t dropout_seed);

template <typename Scalar>
struct LossResult {
  double loss = 0.0;  // weighted sum of per-position cross-entropy (nats)
  typename ParamStore<Scalar>::Matrix dlogits;
};

// Mean softmax cross-entropy over all rows; dlogits is d(loss)/d(logits).
template <typename Scalar>
LossResult<Scalar> CrossEntropy(
    const typename ParamStore<Scalar>::Matrix& logits,
    std::span<const TokenId> targets);

// Weighted variant: loss = sum_r weight[r] * CE_r.
template <typename Scalar>
LossResult<Scalar> CrossEntropy(
    const typename ParamStore<Scalar>::Matrix& logits,
    std::span<const TokenId> targets, std::span<const double> weights);

// Exact gradient of the scalar whose logits-gradient is dlogits, by
// backpropagation through time. Consumes the cache; throws DataError if the
// cache is stale (parameters changed or already consumed).
template <typename Scalar>
Gradients<Scalar> Backward(ForwardCache<Scalar>& cache,
                           const ModelParams<Scalar>& params,
                           const typename ParamStore<Scalar>::Matrix& dlogits);

// Per-sequence variant. For each sequence b in input order, writes the
// gradient contributed by b's rows of dlogits into scratch and calls
// sink(b, scratch, touched_embedding_rows). Only the listed embedding rows of
// scratch are meaningful; all other embedding rows are zero.
template <typename Scalar>
using SequenceGradientSink = std::function<void(
    int sequence, const Gradients<Scalar>& grad,
    std::span<const TokenId> touched_embedding_rows)>;

template <typename Scalar>
void BackwardPerSequence(ForwardCache<Scalar>& cache,
                         const ModelParams<Scalar>& params,
                         const typename ParamStore<Scalar>::Matrix& dlogits,
                         Gradients<Scalar>& scratch,
                         const SequenceGradientSink<Scalar>& sink);

// Recurrent state for incremental evaluation-mode decoding.
template <typename Scalar>
struct LstmState {
  using Vector = typename ParamStore<Scalar>::Vector;
  Vector hidden[ModelConfig::kLayers];
  Vector cell[ModelConfig::kLayers];
};

template <typename Scalar>
LstmState<Scalar> InitialState(const ModelConfig& config);

// Consumes one token in evaluation mode and returns next-token logits.
template <typename Scalar>
typename ParamStore<Scalar>::Vector Step(const ModelParams<Scalar>& params,
                                         LstmState<Scalar>& state,
                                         TokenId token);

// Numerically stable log-softmax / softmax in double precision.
std::vector<double> LogSoftmax(std::span<const double> logits);

// Next-token distribution after prefix (evaluation mode). Sums to 1 within
// 1e-12 in double precision. Throws DataError on an empty prefix.
template <typename Scalar>
std::vector<double> PredictNext(const ModelParams<Scalar>& params,
                                std::span<const TokenId> prefix);

}  // namespace memlab

#endif  // MEMLAB_MODEL_H_
