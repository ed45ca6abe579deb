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

#ifndef MEMLAB_CORPUS_H_
#define MEMLAB_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace memlab {

using Document = std::vector<std::string>;

// An ordered collection of non-empty tokenized documents. Tokens never contain
// whitespace.
struct TextCorpus {
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  std::size_t TokenCount() const;
  bool operator==(const TextCorpus&) const = default;
};

// Word tokenizer.
//
// The line is split on ASCII whitespace. Within each chunk, leading and
// trailing ASCII punctuation characters are detached one character per token;
// punctuation inside a word ("I'm", "run-off", "3.5") stays attached. Chunks
// that look like bracketed tags ("<DATE_TIME>") are kept whole. Bytes >= 0x80
// are word characters, so non-ASCII text passes through unchanged.
//
//   "I won."        -> ["I", "won", "."]
//   "(at 2, ok)"    -> ["(", "at", "2", ",", "ok", ")"]
std::vector<std::string> Tokenize(std::string_view line);

// True for chunks of the form <[A-Z0-9_]+>.
bool IsTagToken(std::string_view token);

// Reads UTF-8 text, one document per line. Empty (or whitespace-only) lines
// are skipped. Throws IngestError naming the byte offset of the first invalid
// UTF-8 sequence.
TextCorpus IngestText(std::istream& in);
TextCorpus IngestText(std::string_view text);
TextCorpus ReadCorpusFile(const std::string& path);

// Writes documents one per line with tokens joined by single spaces. Reading
// the output back with IngestText reproduces the corpus whenever every token
// is a fixed point of Tokenize.
void WriteCorpus(const TextCorpus& corpus, std::ostream& out);
void WriteCorpusFile(const TextCorpus& corpus, const std::string& path);

struct SyntheticCorpusOptions {
  // Distinct pseudo-words available to the generator.
  int lexicon_size = 12000;
  // Exponent s of the rank-frequency law p(r) ~ r^-s.
  double zipf_exponent = 1.0;
  // Number of latent word classes driving the sentence-level Markov chain.
  int num_classes = 8;
  int min_sentence_len = 4;
  int max_sentence_len = 24;
  int max_sentences_per_doc = 3;
};

inline constexpr std::size_t kMinSyntheticTokens = 10000;

// Deterministic desk-scale stand-in for a forum corpus. Words come from a
// pseudo-word lexicon whose marginal frequencies follow a Zipf law; a
// doubly-stochastic Markov chain over word classes gives sentences local
// structure a language model can learn. Each sentence ends with ".", "?" or
// "!". Generation stops at the first document boundary at or past n_tokens.
// Throws ConfigError if n_tokens < kMinSyntheticTokens.
TextCorpus MakeSyntheticCorpus(std::uint64_t seed, std::size_t n_tokens,
                               const SyntheticCorpusOptions& options = {});

struct CorpusSplit {
  TextCorpus train;
  TextCorpus valid;
  TextCorpus test;
};

// Seeded shuffle followed by contiguous cuts. Train and valid sizes are
// rounded to the nearest document; test takes the remainder. Fractions must be
// non-negative, sum to 1 (within 1e-9) and give train a positive share.
CorpusSplit Split(const TextCorpus& corpus, std::array<double, 3> fractions,
                  std::uint64_t seed);

}  // namespace memlab

#endif  // MEMLAB_CORPUS_H_
