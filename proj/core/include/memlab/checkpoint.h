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

#ifndef MEMLAB_CHECKPOINT_H_
#define MEMLAB_CHECKPOINT_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "memlab/model.h"

namespace memlab {

// Binary checkpoint layout (little-endian):
//
//   "MLCK" u32 version
//   i32 vocab_size, i32 hidden_size, f64 dropout, i32 max_seq_len,
//   f64 init_scale, u64 seed
//   u64 step, u32 tensor_count
//   per tensor: u32 name_len, name bytes, i64 rows, i64 cols,
//               u8 scalar_bytes (4 or 8), raw values
//
// Values stored at one precision load back bit-exactly at that precision and
// are converted otherwise.
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename Scalar>
struct Checkpoint {
  ModelParams<Scalar> params;
  std::uint64_t step = 0;
};

template <typename Scalar>
void WriteCheckpoint(const ModelParams<Scalar>& params, std::uint64_t step,
                     std::ostream& out);
template <typename Scalar>
void SaveCheckpoint(const ModelParams<Scalar>& params, std::uint64_t step,
                    const std::string& path);

// Throws ParseError on malformed input, IoError if the file cannot be read.
template <typename Scalar>
Checkpoint<Scalar> ReadCheckpoint(std::istream& in);
template <typename Scalar>
Checkpoint<Scalar> LoadCheckpoint(const std::string& path);

}  // namespace memlab

#endif  // MEMLAB_CHECKPOINT_H_
