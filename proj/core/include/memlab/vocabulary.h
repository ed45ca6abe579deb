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

#ifndef MEMLAB_VOCABULARY_H_
#define MEMLAB_VOCABULARY_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "memlab/corpus.h"

namespace memlab {

using TokenId = std::int32_t;

inline constexpr std::string_view kUnknownToken = "<unk>";

// Tag tokens emitted by the scrubber, in their reserved id order (ids 1..7).
inline constexpr std::string_view kScrubTags[] = {
    "<PERSON>",       "<DATE_TIME>", "<NUMBER>", "<LOCATION>",
    "<ORGANIZATION>", "<EMAIL>",     "<URL>"};

// <unk> followed by kScrubTags. These always occupy ids 0..7.
std::span<const std::string_view> SpecialTokens();
bool IsSpecialToken(std::string_view token);

inline constexpr int kDefaultVocabSize = 25000;

// Frequency-ranked word vocabulary with reserved special tokens.
//
// Ids are dense. Specials come first in a fixed order; ordinary tokens follow
// in descending corpus frequency with ties broken by byte-wise lexicographic
// order. The size limit counts the specials, so Build(corpus, V) keeps at most
// V - |specials| ordinary tokens (fewer if the corpus has fewer types).
class Vocabulary {
 public:
  Vocabulary();

  // Throws ConfigError if size_limit <= number of special tokens.
  static Vocabulary Build(const TextCorpus& corpus, int size_limit);

  // Restores a vocabulary from its rank-ordered token list. The list must
  // start with the special tokens in their reserved order and contain no
  // duplicates; throws ParseError otherwise.
  static Vocabulary FromTokens(std::vector<std::string> ranked);

  static Vocabulary Load(std::istream& in);
  void Save(std::ostream& out) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  int size_limit() const { return size_limit_; }
  TokenId unknown_id() const { return 0; }

  bool Contains(std::string_view token) const;
  // Id of token, or unknown_id() for out-of-vocabulary tokens.
  TokenId Id(std::string_view token) const;
  const std::string& Token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> Encode(std::span<const std::string> words) const;
  std::vector<std::vector<TokenId>> Encode(const TextCorpus& corpus) const;
  std::vector<std::string> Decode(std::span<const TokenId> ids) const;

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  void Index();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> id_of_;
  int size_limit_ = 0;
};

}  // namespace memlab

#endif  // MEMLAB_VOCABULARY_H_
