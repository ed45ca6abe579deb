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

#ifndef MEMLAB_SCRUB_H_
#define MEMLAB_SCRUB_H_

#include <cstddef>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memlab/corpus.h"

namespace memlab {

// One replacement rule. Every rule maps onto exactly one tag token, which must
// be one of kScrubTags.
struct ScrubRule {
  enum class Kind {
    // Case-sensitive phrase list. A phrase may be preceded by one modifier
    // word ("this", "next"); phrases listed in modifier_required only match
    // with a modifier. With extend_capitalized the match absorbs any directly
    // following capitalized tokens ("Maria" + "Lopez").
    kLexicon,
    // Single-token regular expression (full match). Tokens lacking every
    // character of prefilter are skipped without running the regex.
    kPattern,
    // Maximal run of >= min_length capitalized tokens that does not start at
    // a sentence-initial position.
    kCapitalizedRun,
  };

  Kind kind = Kind::kLexicon;
  std::string name;
  std::string tag;

  std::vector<std::vector<std::string>> phrases;
  std::vector<std::vector<std::string>> modifier_required;
  std::vector<std::string> modifiers;
  bool extend_capitalized = false;

  std::string pattern;
  std::string prefilter;
  std::regex compiled;

  int min_length = 2;
  // Capitalized tokens that never belong to a run (e.g. "I").
  std::vector<std::string> exclude;
};

// Ordered rule set. At each position the first rule that matches wins and its
// longest match is replaced; scanning continues after the replaced span.
class ScrubRules {
 public:
  // Parses the JSON rule format (see data/scrub_rules.json). Throws
  // ParseError on malformed input or tags outside kScrubTags.
  static ScrubRules FromJson(std::string_view json);
  static ScrubRules Load(const std::string& path);
  // The rule set shipped in data/scrub_rules.json, compiled into the library.
  static const ScrubRules& Shipped();

  const std::vector<ScrubRule>& rules() const { return rules_; }

 private:
  std::vector<ScrubRule> rules_;
};

// A replaced source range [begin, end) and its tag.
struct ScrubSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string tag;
  std::string rule;
};

struct ScrubResult {
  std::vector<std::string> tokens;
  std::vector<ScrubSpan> spans;
};

ScrubResult ScrubWithSpans(std::span<const std::string> tokens,
                           const ScrubRules& rules);
std::vector<std::string> Scrub(std::span<const std::string> tokens,
                               const ScrubRules& rules);
TextCorpus Scrub(const TextCorpus& corpus, const ScrubRules& rules);

}  // namespace memlab

#endif  // MEMLAB_SCRUB_H_
