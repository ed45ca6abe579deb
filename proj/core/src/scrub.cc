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

#include "memlab/scrub.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "memlab/embedded_data.h"
#include "memlab/error.h"
#include "memlab/vocabulary.h"

namespace memlab {
namespace {

using nlohmann::json;

bool IsCapitalized(std::string_view tok) {
  return !tok.empty() && tok[0] >= 'A' && tok[0] <= 'Z';
}

bool IsSentenceEnd(std::string_view tok) {
  return tok == "." || tok == "?" || tok == "!";
}

bool SentenceInitial(std::span<const std::string> tokens, std::size_t i) {
  return i == 0 || IsSentenceEnd(tokens[i - 1]);
}

std::vector<std::vector<std::string>> ParsePhrases(const json& j,
                                                   const std::string& rule) {
  std::vector<std::vector<std::string>> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw ParseError("rule '" + rule + "': phrase list must be an array");
  for (const auto& p : j) {
    if (!p.is_string()) throw ParseError("rule '" + rule + "': phrases must be strings");
    auto toks = Tokenize(p.get<std::string>());
    if (toks.empty()) throw ParseError("rule '" + rule + "': empty phrase");
    // A phrase swallowing a sentence terminator would change which tokens
    // count as sentence-initial on a second pass.
    for (const auto& t : toks)
      if (IsSentenceEnd(t))
        throw ParseError("rule '" + rule + "': phrase contains sentence terminator");
    out.push_back(std::move(toks));
  }
  return out;
}

bool MatchAt(std::span<const std::string> tokens, std::size_t i,
             const std::vector<std::string>& phrase) {
  if (i + phrase.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < phrase.size(); ++k)
    if (tokens[i + k] != phrase[k]) return false;
  return true;
}

// Longest phrase from the list matching at i; 0 if none.
std::size_t LongestPhrase(std::span<const std::string> tokens, std::size_t i,
                          const std::vector<std::vector<std::string>>& phrases) {
  std::size_t best = 0;
  for (const auto& p : phrases)
    if (p.size() > best && MatchAt(tokens, i, p)) best = p.size();
  return best;
}

std::size_t MatchLexicon(const ScrubRule& r, std::span<const std::string> tokens,
                         std::size_t i) {
  std::size_t len = 0;
  const bool has_modifier =
      std::find(r.modifiers.begin(), r.modifiers.end(), tokens[i]) !=
      r.modifiers.end();
  if (has_modifier && i + 1 < tokens.size()) {
    std::size_t inner = std::max(LongestPhrase(tokens, i + 1, r.phrases),
                                 LongestPhrase(tokens, i + 1, r.modifier_required));
    if (inner > 0) len = 1 + inner;
  }
  if (len == 0) len = LongestPhrase(tokens, i, r.phrases);
  if (len > 0 && r.extend_capitalized) {
    while (i + len < tokens.size() && IsCapitalized(tokens[i + len]) &&
           !IsTagToken(tokens[i + len]))
      ++len;
  }
  return len;
}

std::size_t MatchPattern(const ScrubRule& r, std::span<const std::string> tokens,
                         std::size_t i) {
  const std::string& tok = tokens[i];
  if (!r.prefilter.empty() && tok.find_first_of(r.prefilter) == std::string::npos)
    return 0;
  return std::regex_match(tok, r.compiled) ? 1 : 0;
}

std::size_t MatchCapitalizedRun(const ScrubRule& r,
                                std::span<const std::string> tokens,
                                std::size_t i) {
  if (SentenceInitial(tokens, i)) return 0;
  auto name_like = [&](const std::string& tok) {
    return IsCapitalized(tok) &&
           std::find(r.exclude.begin(), r.exclude.end(), tok) == r.exclude.end();
  };
  std::size_t len = 0;
  while (i + len < tokens.size() && name_like(tokens[i + len])) ++len;
  return static_cast<int>(len) >= r.min_length ? len : 0;
}

std::size_t Match(const ScrubRule& r, std::span<const std::string> tokens,
                  std::size_t i) {
  switch (r.kind) {
    case ScrubRule::Kind::kLexicon:
      return MatchLexicon(r, tokens, i);
    case ScrubRule::Kind::kPattern:
      return MatchPattern(r, tokens, i);
    case ScrubRule::Kind::kCapitalizedRun:
      return MatchCapitalizedRun(r, tokens, i);
  }
  return 0;
}

}  // namespace

ScrubRules ScrubRules::FromJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scrub rules: ") + e.what());
  }
  if (!doc.contains("rules") || !doc["rules"].is_array())
    throw ParseError("scrub rules: missing 'rules' array");

  ScrubRules out;
  for (const auto& j : doc["rules"]) {
    ScrubRule r;
    r.name = j.value("name", std::string("rule") + std::to_string(out.rules_.size()));
    r.tag = j.value("tag", std::string());
    if (std::find(std::begin(kScrubTags), std::end(kScrubTags), r.tag) ==
        std::end(kScrubTags)) {
      throw ParseError("rule '" + r.name + "': unknown tag '" + r.tag + "'");
    }
    const std::string kind = j.value("kind", std::string());
    try {
      if (kind == "lexicon") {
        r.kind = ScrubRule::Kind::kLexicon;
        r.phrases = ParsePhrases(j.value("phrases", json()), r.name);
        r.modifier_required = ParsePhrases(j.value("modifier_required", json()), r.name);
        r.modifiers = j.value("modifiers", std::vector<std::string>{});
        r.extend_capitalized = j.value("extend_capitalized", false);
        if (r.phrases.empty() && r.modifier_required.empty())
          throw ParseError("rule '" + r.name + "': lexicon has no phrases");
      } else if (kind == "pattern") {
        r.kind = ScrubRule::Kind::kPattern;
        r.pattern = j.value("pattern", std::string());
        r.prefilter = j.value("prefilter", std::string());
        if (r.pattern.empty()) throw ParseError("rule '" + r.name + "': empty pattern");
        try {
          r.compiled = std::regex(r.pattern, std::regex::ECMAScript | std::regex::optimize);
        } catch (const std::regex_error& e) {
          throw ParseError("rule '" + r.name + "': bad pattern: " + e.what());
        }
      } else if (kind == "capitalized_run") {
        r.kind = ScrubRule::Kind::kCapitalizedRun;
        r.min_length = j.value("min_length", 2);
        r.exclude = j.value("exclude", std::vector<std::string>{});
        if (r.min_length < 1) throw ParseError("rule '" + r.name + "': min_length < 1");
      } else {
        throw ParseError("rule '" + r.name + "': unknown kind '" + kind + "'");
      }
    } catch (const json::type_error& e) {
      throw ParseError("rule '" + r.name + "': " + e.what());
    }
    out.rules_.push_back(std::move(r));
  }
  return out;
}

ScrubRules ScrubRules::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scrub rules " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

const ScrubRules& ScrubRules::Shipped() {
  static const ScrubRules rules = FromJson(embedded::ScrubRulesJson());
  return rules;
}

ScrubResult ScrubWithSpans(std::span<const std::string> tokens,
                           const ScrubRules& rules) {
  ScrubResult out;
  out.tokens.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t len = 0;
    const ScrubRule* hit = nullptr;
    if (!IsTagToken(tokens[i])) {
      for (const auto& r : rules.rules()) {
        len = Match(r, tokens, i);
        if (len > 0) {
          hit = &r;
          break;
        }
      }
    }
    if (hit == nullptr) {
      out.tokens.push_back(tokens[i]);
      ++i;
      continue;
    }
    out.tokens.push_back(hit->tag);
    out.spans.push_back({i, i + len, hit->tag, hit->name});
    i += len;
  }
  return out;
}

std::vector<std::string> Scrub(std::span<const std::string> tokens,
                               const ScrubRules& rules) {
  return ScrubWithSpans(tokens, rules).tokens;
}

TextCorpus Scrub(const TextCorpus& corpus, const ScrubRules& rules) {
  TextCorpus out;
  out.documents.reserve(corpus.size());
  for (const auto& doc : corpus.documents) out.documents.push_back(Scrub(doc, rules));
  return out;
}

}  // namespace memlab
