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

#include "memlab/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>

#include "memlab/error.h"
#include "memlab/random.h"

namespace memlab {
namespace {

bool IsAsciiSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsAsciiPunct(unsigned char c) {
  return c < 0x80 && std::ispunct(c) != 0;
}

bool IsTagChar(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Length of a tag at the start of s, or 0.
std::size_t TagPrefixLength(std::string_view s) {
  if (s.size() < 3 || s[0] != '<') return 0;
  std::size_t i = 1;
  while (i < s.size() && IsTagChar(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 1 || i >= s.size() || s[i] != '>') return 0;
  return i + 1;
}

void TokenizeChunk(std::string_view chunk, std::vector<std::string>& out) {
  while (!chunk.empty()) {
    if (std::size_t tag = TagPrefixLength(chunk); tag > 0) {
      out.emplace_back(chunk.substr(0, tag));
      chunk.remove_prefix(tag);
      continue;
    }
    if (IsAsciiPunct(static_cast<unsigned char>(chunk.front()))) {
      out.emplace_back(1, chunk.front());
      chunk.remove_prefix(1);
      continue;
    }
    std::size_t end = chunk.size();
    while (end > 0 && IsAsciiPunct(static_cast<unsigned char>(chunk[end - 1])))
      --end;
    out.emplace_back(chunk.substr(0, end));
    for (std::size_t i = end; i < chunk.size(); ++i)
      out.emplace_back(1, chunk[i]);
    return;
  }
}

// Returns the offset of the first invalid UTF-8 sequence, or npos.
std::size_t FindInvalidUtf8(std::string_view s) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char c = p[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len;
    std::uint32_t cp;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) ||
                          (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::string_view::npos;
}

// Pseudo-word lexicon built from consonant-vowel syllables.
std::vector<std::string> MakeLexicon(Rng& rng, int size) {
  static constexpr std::string_view kOnsets[] = {
      "b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s",
      "t", "v", "w", "z", "br", "ch", "dr", "gr", "pl", "sh", "st", "tr"};
  static constexpr std::string_view kVowels[] = {"a", "e",  "i",  "o", "u",
                                                 "ai", "ea", "oo", "ou"};
  static constexpr std::string_view kCodas[] = {"", "", "", "n", "r",
                                                "s", "t", "l", "m", "k"};
  std::uniform_int_distribution<int> syllables(1, 3);
  std::uniform_int_distribution<std::size_t> onset(0, std::size(kOnsets) - 1);
  std::uniform_int_distribution<std::size_t> vowel(0, std::size(kVowels) - 1);
  std::uniform_int_distribution<std::size_t> coda(0, std::size(kCodas) - 1);

  std::set<std::string> seen;
  std::vector<std::string> words;
  words.reserve(size);
  while (static_cast<int>(words.size()) < size) {
    std::string w;
    const int n = syllables(rng);
    for (int k = 0; k < n; ++k) {
      w += kOnsets[onset(rng)];
      w += kVowels[vowel(rng)];
      if (k + 1 == n) w += kCodas[coda(rng)];
    }
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

}  // namespace

std::size_t TextCorpus::TokenCount() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.size();
  return n;
}

bool IsTagToken(std::string_view token) {
  return !token.empty() && TagPrefixLength(token) == token.size();
}

std::vector<std::string> Tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsAsciiSpace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() &&
           !IsAsciiSpace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) TokenizeChunk(line.substr(i, j - i), out);
    i = j;
  }
  return out;
}

TextCorpus IngestText(std::string_view text) {
  if (std::size_t bad = FindInvalidUtf8(text); bad != std::string_view::npos)
    throw IngestError("invalid UTF-8", bad);
  TextCorpus corpus;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto tokens = Tokenize(text.substr(start, end - start));
    if (!tokens.empty()) corpus.documents.push_back(std::move(tokens));
    start = end + 1;
  }
  return corpus;
}

TextCorpus IngestText(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in),
                   std::istreambuf_iterator<char>()};
  return IngestText(std::string_view(text));
}

TextCorpus ReadCorpusFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path);
  return IngestText(in);
}

void WriteCorpus(const TextCorpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (i) out << ' ';
      out << doc[i];
    }
    out << '\n';
  }
}

void WriteCorpusFile(const TextCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file " + path);
  WriteCorpus(corpus, out);
  if (!out) throw IoError("write failed for " + path);
}

TextCorpus MakeSyntheticCorpus(std::uint64_t seed, std::size_t n_tokens,
                               const SyntheticCorpusOptions& options) {
  if (n_tokens < kMinSyntheticTokens) {
    throw ConfigError("synthetic corpus needs at least " +
                      std::to_string(kMinSyntheticTokens) + " tokens, got " +
                      std::to_string(n_tokens));
  }
  if (options.lexicon_size < options.num_classes || options.num_classes < 1 ||
      options.min_sentence_len < 1 ||
      options.max_sentence_len < options.min_sentence_len ||
      options.max_sentences_per_doc < 1 || options.zipf_exponent <= 0) {
    throw ConfigError("invalid synthetic corpus options");
  }
  Rng rng(DeriveSeed(seed, Stream::kSynthetic));
  const std::vector<std::string> lexicon = MakeLexicon(rng, options.lexicon_size);
  const int k = options.num_classes;

  // Assign words in rank order to the lightest class so every class carries
  // roughly 1/k of the Zipf mass. With a uniform stationary class
  // distribution the word marginal then stays close to the Zipf law.
  std::vector<std::vector<int>> members(k);
  std::vector<std::vector<double>> weights(k);
  std::vector<double> mass(k, 0.0);
  for (int r = 0; r < options.lexicon_size; ++r) {
    const double w = std::pow(static_cast<double>(r + 1), -options.zipf_exponent);
    const int c = static_cast<int>(
        std::min_element(mass.begin(), mass.end()) - mass.begin());
    members[c].push_back(r);
    weights[c].push_back(w);
    mass[c] += w;
  }
  std::vector<std::discrete_distribution<int>> emit;
  emit.reserve(k);
  for (int c = 0; c < k; ++c)
    emit.emplace_back(weights[c].begin(), weights[c].end());

  // Doubly stochastic transitions: two shift permutations plus a uniform
  // component.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_class(0, k - 1);
  auto next_class = [&](int c) {
    const double u = unit(rng);
    if (u < 0.5) return (c + 1) % k;
    if (u < 0.8) return (c + k / 2 + 1) % k;
    return any_class(rng);
  };
  std::uniform_int_distribution<int> sentence_len(options.min_sentence_len,
                                                  options.max_sentence_len);
  std::uniform_int_distribution<int> sentences(1, options.max_sentences_per_doc);

  TextCorpus corpus;
  std::size_t produced = 0;
  while (produced < n_tokens) {
    Document doc;
    const int ns = sentences(rng);
    for (int s = 0; s < ns; ++s) {
      int c = any_class(rng);
      const int len = sentence_len(rng);
      for (int t = 0; t < len; ++t) {
        doc.push_back(lexicon[members[c][emit[c](rng)]]);
        c = next_class(c);
      }
      const double u = unit(rng);
      doc.emplace_back(u < 0.8 ? "." : (u < 0.92 ? "?" : "!"));
    }
    produced += doc.size();
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

CorpusSplit Split(const TextCorpus& corpus, std::array<double, 3> fractions,
                  std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0) || !std::isfinite(f))
      throw ConfigError("split fractions must be finite and non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
  if (fractions[0] <= 0.0) throw ConfigError("train fraction must be positive");

  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(DeriveSeed(seed, Stream::kSplit));
  std::shuffle(order.begin(), order.end(), rng);

  auto count = [n](double f) {
    return static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
  };
  const std::size_t n_train = std::min(n, count(fractions[0]));
  const std::size_t n_valid = std::min(n - n_train, count(fractions[1]));

  CorpusSplit out;
  for (std::size_t i = 0; i < n; ++i) {
    TextCorpus& dst = i < n_train             ? out.train
                      : i < n_train + n_valid ? out.valid
                                              : out.test;
    dst.documents.push_back(corpus.documents[order[i]]);
  }
  return out;
}

}  // namespace memlab
