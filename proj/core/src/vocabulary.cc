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

#include "memlab/vocabulary.h"

#include <algorithm>
#include <array>
#include <string>

#include "memlab/error.h"

namespace memlab {
namespace {

constexpr auto kSpecials = [] {
  std::array<std::string_view, 1 + std::size(kScrubTags)> a{};
  a[0] = kUnknownToken;
  for (std::size_t i = 0; i < std::size(kScrubTags); ++i) a[i + 1] = kScrubTags[i];
  return a;
}();

}  // namespace

std::span<const std::string_view> SpecialTokens() { return kSpecials; }

bool IsSpecialToken(std::string_view token) {
  return std::find(kSpecials.begin(), kSpecials.end(), token) != kSpecials.end();
}

Vocabulary::Vocabulary() {
  for (auto s : kSpecials) tokens_.emplace_back(s);
  size_limit_ = static_cast<int>(tokens_.size());
  Index();
}

void Vocabulary::Index() {
  id_of_.clear();
  id_of_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!id_of_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
      throw ParseError("duplicate vocabulary token '" + tokens_[i] + "'");
  }
}

Vocabulary Vocabulary::Build(const TextCorpus& corpus, int size_limit) {
  const int n_special = static_cast<int>(kSpecials.size());
  if (size_limit <= n_special) {
    throw ConfigError("vocabulary size " + std::to_string(size_limit) +
                      " must exceed the " + std::to_string(n_special) +
                      " special tokens");
  }
  std::unordered_map<std::string_view, std::int64_t> counts;
  for (const auto& doc : corpus.documents)
    for (const auto& tok : doc)
      if (!IsSpecialToken(tok)) ++counts[tok];

  std::vector<std::pair<std::string_view, std::int64_t>> ranked(counts.begin(),
                                                                counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t keep =
      std::min(ranked.size(), static_cast<std::size_t>(size_limit - n_special));

  Vocabulary v;
  v.tokens_.reserve(n_special + keep);
  for (std::size_t i = 0; i < keep; ++i) v.tokens_.emplace_back(ranked[i].first);
  v.size_limit_ = size_limit;
  v.Index();
  return v;
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> ranked) {
  if (ranked.size() < kSpecials.size())
    throw ParseError("vocabulary is missing special tokens");
  for (std::size_t i = 0; i < kSpecials.size(); ++i) {
    if (ranked[i] != kSpecials[i]) {
      throw ParseError("vocabulary line " + std::to_string(i + 1) +
                       " must be special token " + std::string(kSpecials[i]));
    }
  }
  Vocabulary v;
  v.tokens_ = std::move(ranked);
  v.size_limit_ = static_cast<int>(v.tokens_.size());
  v.Index();
  return v;
}

Vocabulary Vocabulary::Load(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    tokens.push_back(line);
  }
  return FromTokens(std::move(tokens));
}

void Vocabulary::Save(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

bool Vocabulary::Contains(std::string_view token) const {
  return id_of_.find(token) != id_of_.end();
}

TokenId Vocabulary::Id(std::string_view token) const {
  auto it = id_of_.find(token);
  return it == id_of_.end() ? unknown_id() : it->second;
}

const std::string& Vocabulary::Token(TokenId id) const {
  if (id < 0 || id >= size())
    throw DataError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::vector<TokenId> Vocabulary::Encode(std::span<const std::string> words) const {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(Id(w));
  return ids;
}

std::vector<std::vector<TokenId>> Vocabulary::Encode(const TextCorpus& corpus) const {
  std::vector<std::vector<TokenId>> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.documents) out.push_back(Encode(doc));
  return out;
}

std::vector<std::string> Vocabulary::Decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(Token(id));
  return out;
}

}  // namespace memlab
