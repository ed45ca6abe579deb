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

#include "memlab/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "memlab/error.h"

namespace memlab {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'L', 'C', 'K'};

template <typename T>
void Put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::istream& in, const char* what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw ParseError(std::string("checkpoint truncated reading ") + what);
  return v;
}

template <typename From, typename To>
void ReadValues(std::istream& in, To* dst, std::size_t n) {
  if constexpr (std::is_same_v<From, To>) {
    if (!in.read(reinterpret_cast<char*>(dst), n * sizeof(To)))
      throw ParseError("checkpoint truncated reading tensor data");
  } else {
    std::vector<From> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), n * sizeof(From)))
      throw ParseError("checkpoint truncated reading tensor data");
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<To>(buf[i]);
  }
}

}  // namespace

template <typename Scalar>
void WriteCheckpoint(const ModelParams<Scalar>& params, std::uint64_t step,
                     std::ostream& out) {
  const ModelConfig& c = params.config();
  out.write(kMagic, 4);
  Put<std::uint32_t>(out, kCheckpointVersion);
  Put<std::int32_t>(out, c.vocab_size);
  Put<std::int32_t>(out, c.hidden_size);
  Put<double>(out, c.dropout);
  Put<std::int32_t>(out, c.max_seq_len);
  Put<double>(out, c.init_scale);
  Put<std::uint64_t>(out, c.seed);
  Put<std::uint64_t>(out, step);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(params.layout().size()));
  for (const auto& slot : params.layout()) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(slot.name.size()));
    out.write(slot.name.data(), slot.name.size());
    Put<std::int64_t>(out, slot.rows);
    Put<std::int64_t>(out, slot.cols);
    Put<std::uint8_t>(out, sizeof(Scalar));
    out.write(reinterpret_cast<const char*>(params.flat().data() + slot.offset),
              slot.size() * sizeof(Scalar));
  }
  if (!out) throw IoError("checkpoint write failed");
}

template <typename Scalar>
void SaveCheckpoint(const ModelParams<Scalar>& params, std::uint64_t step,
                    const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    WriteCheckpoint(params, step, out);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + ": " + ec.message());
}

template <typename Scalar>
Checkpoint<Scalar> ReadCheckpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError("not a memlab checkpoint (bad magic)");
  const auto version = Get<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig c;
  c.vocab_size = Get<std::int32_t>(in, "config");
  c.hidden_size = Get<std::int32_t>(in, "config");
  c.dropout = Get<double>(in, "config");
  c.max_seq_len = Get<std::int32_t>(in, "config");
  c.init_scale = Get<double>(in, "config");
  c.seed = Get<std::uint64_t>(in, "config");
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint config invalid: ") + e.what());
  }
  Checkpoint<Scalar> out{ModelParams<Scalar>(c), Get<std::uint64_t>(in, "step")};
  const auto count = Get<std::uint32_t>(in, "tensor count");
  if (count != out.params.layout().size())
    throw ParseError("checkpoint has " + std::to_string(count) + " tensors, expected " +
                     std::to_string(out.params.layout().size()));
  auto& flat = out.params.mutable_flat();
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto len = Get<std::uint32_t>(in, "tensor name");
    if (len > 256) throw ParseError("checkpoint tensor name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw ParseError("checkpoint truncated in name");
    const TensorSlot& slot = out.params.slot(name);
    const auto rows = Get<std::int64_t>(in, "shape");
    const auto cols = Get<std::int64_t>(in, "shape");
    if (rows != slot.rows || cols != slot.cols)
      throw ParseError("checkpoint tensor " + name + " has wrong shape");
    const auto bytes = Get<std::uint8_t>(in, "dtype");
    Scalar* dst = flat.data() + slot.offset;
    if (bytes == 4) {
      ReadValues<float>(in, dst, slot.size());
    } else if (bytes == 8) {
      ReadValues<double>(in, dst, slot.size());
    } else {
      throw ParseError("checkpoint tensor " + name + " has bad dtype");
    }
  }
  return out;
}

template <typename Scalar>
Checkpoint<Scalar> LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  return ReadCheckpoint<Scalar>(in);
}

#define MEMLAB_INSTANTIATE_CHECKPOINT(S)                                        \
  template void WriteCheckpoint<S>(const ModelParams<S>&, std::uint64_t,        \
                                   std::ostream&);                              \
  template void SaveCheckpoint<S>(const ModelParams<S>&, std::uint64_t,         \
                                  const std::string&);                          \
  template Checkpoint<S> ReadCheckpoint<S>(std::istream&);                      \
  template Checkpoint<S> LoadCheckpoint<S>(const std::string&);

MEMLAB_INSTANTIATE_CHECKPOINT(float)
MEMLAB_INSTANTIATE_CHECKPOINT(double)

}  // namespace memlab
