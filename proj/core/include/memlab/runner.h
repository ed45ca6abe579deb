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

#ifndef MEMLAB_RUNNER_H_
#define MEMLAB_RUNNER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memlab/canary.h"
#include "memlab/dpsgd.h"
#include "memlab/extract.h"
#include "memlab/model.h"
#include "memlab/results.h"
#include "memlab/train.h"
#include "memlab/vocabulary.h"

namespace memlab {

struct CorpusSource {
  // Plain-text corpus, one document per line. Empty selects the synthetic
  // generator.
  std::string path;
  std::size_t synthetic_tokens = 2'000'000;
  // Seeds synthetic generation and the split; independent of the run seed so
  // that runs in one grid share their corpus.
  std::uint64_t seed = 1;
  std::array<double, 3> split = {0.94, 0.03, 0.03};

  bool operator==(const CorpusSource&) const = default;
};

// Everything needed to reproduce one experiment. The seeds inside model,
// train, injection and dp are overwritten by `seed` when the run starts, and
// model.vocab_size by the size of the built vocabulary; model.dropout always
// follows train.dropout.
struct ExperimentSpec {
  std::string id;
  std::uint64_t seed = 0;
  CorpusSource corpus;
  ModelConfig model{.vocab_size = 0, .hidden_size = 128};
  TrainConfig train;
  InjectionConfig injection;
  // Number of most frequent document starters used as suffix words when
  // injection.suffix_words is empty.
  int suffix_word_count = kDefaultSentenceStarters;
  std::optional<DPConfig> dp;
  bool scrub = false;
  int vocab_size = 5000;
  // Empty paths select the shipped rules and suite.
  std::string scrub_rules_path;
  std::string suite_path;
  DecodeConfig decode;
  bool nll_includes_non_extractable = true;

  // Throws ConfigError.
  void Validate() const;
};

// JSON form of ExperimentSpec. Unknown keys are rejected. Throws ConfigError.
ExperimentSpec SpecFromJson(std::string_view json);
std::string SpecToJson(const ExperimentSpec& spec);

// Expands a grid file: {"grid_seed", "base", "axes", "experiments"}. "axes"
// maps dotted spec keys ("model.hidden_size", "injection.insertions", ...) to
// value lists whose cartesian product is applied on top of "base";
// "experiments" lists explicit partial specs merged onto "base". A file
// holding a single spec (no "base") yields that spec alone.
struct GridConfig {
  std::uint64_t grid_seed = 0;
  std::vector<ExperimentSpec> specs;
};
GridConfig GridFromJson(std::string_view json);
GridConfig LoadGridFile(const std::string& path);

// Desk-scale default grid: hidden {64, 128} x insertions {1, 8, 32, 64} on a
// 2M-token synthetic corpus with a 5000-word vocabulary, 4 concatenations,
// and Adam at max_lr 5e-3 with batch 32. The default 1e-3 at batch 64 leaves
// a 128-unit LSTM at unigram level after one pass over 2M tokens.
GridConfig DeskScaleGrid();

using LogFn = std::function<void(const std::string&)>;

struct RunOptions {
  // When set, writes spec, vocabulary, best checkpoint, run record and
  // privacy ledger under artifacts_dir/<id>/.
  std::string artifacts_dir;
  LogFn log;
};

struct ExperimentOutput {
  ResultRow row;
  TrainReport report;
  ExtractionReport extraction;
  InjectionAudit audit;
  std::optional<PrivacyLedger> ledger;
  double noise_multiplier = 0.0;
  Vocabulary vocab;
  ModelParams<float> params;
  // Canary prefixes touched by scrubbing (0 without scrubbing).
  int prefixes_scrubbed = 0;
};

// Corpus -> split -> inject -> optional scrub -> vocabulary -> train (DP or
// standard) -> evaluate -> extract on the best checkpoint. Deterministic per
// spec. Failures are rethrown as StageError naming the stage.
ExperimentOutput RunExperiment(const ExperimentSpec& spec, const RunOptions& options = {});

// Run record (spec, Adam constants, reports, audit, ledger) as JSON.
std::string RunRecordJson(const ExperimentSpec& spec, const ExperimentOutput& out);

struct GridOptions {
  // Holds rows/<id>.csv (one per finished experiment) and results.csv. Empty
  // keeps everything in memory.
  std::string out_dir;
  // Reuse rows already present in out_dir instead of recomputing them.
  bool resume = false;
  bool save_artifacts = false;
  LogFn log;
  // Test hook: replaces RunExperiment.
  std::function<ResultRow(const ExperimentSpec&)> runner;
};

struct GridFailure {
  std::string id;
  std::string message;
};

struct GridResult {
  std::vector<ResultRow> rows;  // sorted by id
  std::vector<GridFailure> failures;
  int reused = 0;
};

// Seed of a grid member: DeriveSeed(grid_seed, HashString(id)).
std::uint64_t GridMemberSeed(std::uint64_t grid_seed, std::string_view id);

// Runs every spec with its grid-derived seed. A failing spec is recorded and
// the rest still run. Throws ConfigError for duplicate ids.
GridResult RunGrid(const std::vector<ExperimentSpec>& specs, std::uint64_t grid_seed,
                   const GridOptions& options = {});

}  // namespace memlab

#endif  // MEMLAB_RUNNER_H_
