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

#ifndef MEMLAB_CANARY_H_
#define MEMLAB_CANARY_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "memlab/corpus.h"
#include "memlab/scrub.h"

namespace memlab {

inline constexpr int kDefaultCompletionLength = 2;
inline constexpr int kDefaultSentenceStarters = 512;

struct CanarySpec {
  int id = 0;
  std::vector<std::string> prefix;
  std::vector<std::string> completion;

  // prefix followed by completion.
  std::vector<std::string> Tokens() const;
  bool operator==(const CanarySpec&) const = default;
};

// Suite file: one record per line, "id<TAB>prefix<TAB>completion". Blank
// lines and lines starting with '#' are skipped. Throws ParseError naming the
// line and record id when a completion is not exactly n words long.
std::vector<CanarySpec> LoadSuite(std::istream& in,
                                  int n = kDefaultCompletionLength);
std::vector<CanarySpec> LoadSuiteFile(const std::string& path,
                                      int n = kDefaultCompletionLength);
void SerializeSuite(const std::vector<CanarySpec>& suite, std::ostream& out);

// The 50-canary suite compiled into the library.
const std::vector<CanarySpec>& ShippedSuite();

// The m most frequent document-initial tokens, by frequency then
// lexicographically. Throws DataError when fewer than m distinct starters
// exist.
std::vector<std::string> TopSentenceStarters(const TextCorpus& corpus, int m);

struct InjectionConfig {
  int insertions = 0;       // training examples per canary
  int concatenations = 16;  // canary copies inside one example
  std::vector<std::string> suffix_words;
  std::vector<std::string> punctuation = {".", "!", "?", ","};
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
};

struct InjectionAudit {
  // placed[j] = number of examples carrying suite[j].
  std::vector<int> placed;
  // Replaced document indices, ascending.
  std::vector<std::size_t> replaced_documents;
  // Injected examples that byte-equal an earlier injected example.
  int duplicate_examples = 0;

  bool operator==(const InjectionAudit&) const = default;
};

struct InjectionResult {
  TextCorpus corpus;
  InjectionAudit audit;
};

// Replaces insertions * |suite| uniformly chosen documents (without
// replacement) by injected examples: the canary joined c times, then one
// punctuation mark and one suffix word, each drawn independently per example.
// Throws DataError when the corpus is too small.
InjectionResult Inject(const TextCorpus& train,
                       const std::vector<CanarySpec>& suite,
                       const InjectionConfig& config);

// The injected example text for one placement.
Document MakeInjectedExample(const CanarySpec& canary, int concatenations,
                             const std::string& punctuation,
                             const std::string& suffix_word);

// Recounts placements by scanning the corpus for documents of the injected
// form, independent of the bookkeeping done by Inject.
InjectionAudit AuditInjection(const TextCorpus& corpus,
                              const std::vector<CanarySpec>& suite,
                              const InjectionConfig& config);

// A canary as seen by a model trained on scrubbed text.
struct ScrubbedCanary {
  std::vector<std::string> prompt;
  std::vector<std::string> completion;
  bool prefix_altered = false;
  bool completion_altered = false;
};

// Scrubs prefix and completion together, so spans crossing the boundary are
// treated as they would be in training text. A span that crosses the
// boundary counts as altering the completion and is left out of the prompt.
ScrubbedCanary ScrubCanary(const CanarySpec& canary, const ScrubRules& rules);

}  // namespace memlab

#endif  // MEMLAB_CANARY_H_
