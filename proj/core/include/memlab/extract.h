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

#ifndef MEMLAB_EXTRACT_H_
#define MEMLAB_EXTRACT_H_

#include <span>
#include <string>
#include <vector>

#include "memlab/canary.h"
#include "memlab/model.h"
#include "memlab/scrub.h"
#include "memlab/vocabulary.h"

namespace memlab {

struct DecodeConfig {
  int n = kDefaultCompletionLength;  // completion length in words
  int beam_width = 4;

  // Throws ConfigError.
  void Validate() const;
};

// n tokens, each the argmax of the next-token distribution given the prefix
// and the tokens chosen so far. Ties go to the lowest id.
template <typename Scalar>
std::vector<TokenId> GreedyComplete(const ModelParams<Scalar>& params,
                                    std::span<const TokenId> prefix, int n);

struct Hypothesis {
  std::vector<TokenId> ids;
  double log_prob = 0.0;
  bool operator==(const Hypothesis&) const = default;
};

// Orders hypotheses best first: higher cumulative log-probability, then
// lexicographically smaller id sequence.
bool BeamBefore(const Hypothesis& a, const Hypothesis& b);

// Beam search of width b to length n. After each extension only the top b
// hypotheses (by BeamBefore) survive; the survivors at length n are returned
// best first.
template <typename Scalar>
std::vector<Hypothesis> BeamComplete(const ModelParams<Scalar>& params,
                                     std::span<const TokenId> prefix, int n, int b);

// Mean over the completion tokens of -ln p(token | prefix, earlier tokens).
template <typename Scalar>
double CompletionNll(const ModelParams<Scalar>& params,
                     std::span<const TokenId> prefix,
                     std::span<const TokenId> completion);

struct CanaryOutcome {
  int id = 0;
  bool greedy_match = false;
  bool beam_match = false;
  double completion_nll = 0.0;
  // Completion changed by scrubbing; it cannot match its original form.
  bool completion_scrubbed = false;
  // Some completion word is outside the vocabulary.
  bool completion_oov = false;
  bool prefix_scrubbed = false;
  std::vector<std::string> greedy_output;

  bool extractable() const { return !completion_scrubbed && !completion_oov; }
};

struct ExtractionReport {
  std::vector<CanaryOutcome> canaries;
  int canaries_greedy = 0;
  int canaries_beam = 0;
  double mean_completion_nll = 0.0;
  int non_extractable = 0;
  int prefixes_scrubbed = 0;
  // Canaries extracted greedily but missing from the beam.
  int beam_below_greedy = 0;

  std::string ToJson(bool per_canary = true) const;
};

struct SuiteOptions {
  DecodeConfig decode;
  // When set, prompts and completions are seen through these rules, as they
  // would be in scrubbed training text.
  const ScrubRules* scrub = nullptr;
  // Whether non-extractable canaries enter mean_completion_nll.
  bool nll_includes_non_extractable = true;
};

template <typename Scalar>
ExtractionReport RunSuite(const ModelParams<Scalar>& params,
                          const std::vector<CanarySpec>& suite,
                          const Vocabulary& vocab, const SuiteOptions& options = {});

}  // namespace memlab

#endif  // MEMLAB_EXTRACT_H_
