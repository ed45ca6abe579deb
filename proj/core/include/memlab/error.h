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

#ifndef MEMLAB_ERROR_H_
#define MEMLAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace memlab {

// Base class for every error raised by the library. Callers that only care
// about failure vs. success catch this; the subclasses exist so the CLI and
// the experiment runner can report which stage failed.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration, detected before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed structured input (suite files, rule files, CSV, checkpoints).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Text ingestion failure; carries the byte offset of the offending input.
class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t byte_offset)
      : Error(what + " at byte offset " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Data violates an operation precondition (empty corpus, ids out of range,
// too few documents, non-finite gradients, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// An experiment stage failed; wraps the underlying message.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace memlab

#endif  // MEMLAB_ERROR_H_
