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

#include <random>

#include <gtest/gtest.h>

#include "memlab/canary.h"
#include "memlab/corpus.h"
#include "memlab/error.h"

namespace memlab {
namespace {

using Tokens = std::vector<std::string>;

Tokens ScrubLine(std::string_view line) {
  return Scrub(Tokenize(line), ScrubRules::Shipped());
}

TEST(ScrubTest, CanaryDateBecomesTag) {
  EXPECT_EQ(ScrubLine("the new chips can launch by this Christmas"),
            (Tokens{"the", "new", "chips", "can", "launch", "by", "<DATE_TIME>"}));
  EXPECT_EQ(ScrubLine("on track for next fall"), (Tokens{"on", "track", "for", "<DATE_TIME>"}));
}

TEST(ScrubTest, NoMatchIsIdentity) {
  const Tokens t = Tokenize("we need to get serious about this");
  EXPECT_EQ(Scrub(t, ScrubRules::Shipped()), t);
}

TEST(ScrubTest, RuleExamples) {
  EXPECT_EQ(ScrubLine("mail bob.smith@example.com now"), (Tokens{"mail", "<EMAIL>", "now"}));
  EXPECT_EQ(ScrubLine("see https://x.org/a?b=1 or www.test.com"),
            (Tokens{"see", "<URL>", "or", "<URL>"}));
  EXPECT_EQ(ScrubLine("won in 2016 at 10:30 with 42 votes"),
            (Tokens{"won", "in", "<DATE_TIME>", "at", "<DATE_TIME>", "with", "<NUMBER>", "votes"}));
  EXPECT_EQ(ScrubLine("about fifty people in Seattle"),
            (Tokens{"about", "<NUMBER>", "people", "in", "<LOCATION>"}));
  EXPECT_EQ(ScrubLine("he met Maria Lopez at Stanford"),
            (Tokens{"he", "met", "<PERSON>", "at", "<ORGANIZATION>"}));
  // A bare "fall" or "May" is an ordinary word.
  EXPECT_EQ(ScrubLine("you may fall"), (Tokens{"you", "may", "fall"}));
  EXPECT_EQ(ScrubLine("it May rain"), (Tokens{"it", "May", "rain"}));
  // Sentence-initial capitals and "I" are not names.
  EXPECT_EQ(ScrubLine("Then I left"), (Tokens{"Then", "I", "left"}));
}

TEST(ScrubTest, SpansPointAtSource) {
  const Tokens in = Tokenize("call Maria Lopez on Monday");
  const ScrubResult r = ScrubWithSpans(in, ScrubRules::Shipped());
  ASSERT_EQ(r.spans.size(), 2u);
  EXPECT_EQ(r.spans[0].begin, 1u);
  EXPECT_EQ(r.spans[0].end, 3u);
  EXPECT_EQ(r.spans[0].tag, "<PERSON>");
  EXPECT_EQ(r.spans[1].begin, 4u);
  EXPECT_EQ(r.spans[1].tag, "<DATE_TIME>");
}

TEST(ScrubTest, IdempotentOverRandomLines) {
  // Lines mixing ordinary words with every kind of scrubbable token.
  const Tokens pool = {"the", "we", "by", "this", "next", "last", "May", "fall", "spring",
                       "Christmas", "New", "Year's", "Eve", "2016", "1990s", "10:30",
                       "42", "$5", "3.5%", "fifty", "Seattle", "Harvard", "Maria", "Lopez",
                       "I", "I'm", "Bob", ".", "!", "?", ",", "a@b.com", "www.x.com",
                       "<PERSON>", "<NUMBER>", "week", "Monday", "launch", "Lake", "Washington"};
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1), len(1, 20);
  int changed = 0;
  for (int line = 0; line < 1000; ++line) {
    Tokens t(len(rng));
    for (auto& w : t) w = pool[pick(rng)];
    const Tokens once = Scrub(t, ScrubRules::Shipped());
    EXPECT_EQ(Scrub(once, ScrubRules::Shipped()), once);
    changed += once != t;
  }
  EXPECT_GT(changed, 500);
}

TEST(ScrubTest, IdempotentOnSyntheticCorpus) {
  const TextCorpus c = MakeSyntheticCorpus(1, 20000);
  const TextCorpus once = Scrub(c, ScrubRules::Shipped());
  EXPECT_EQ(Scrub(once, ScrubRules::Shipped()), once);
}

TEST(ScrubRulesTest, ParsesAndRejects) {
  const auto rules = ScrubRules::FromJson(
      R"({"rules": [{"name": "n", "kind": "pattern", "tag": "<NUMBER>", "pattern": "[0-9]+"}]})");
  ASSERT_EQ(rules.rules().size(), 1u);
  EXPECT_EQ(Scrub(Tokenize("a 12 b"), rules), (Tokens{"a", "<NUMBER>", "b"}));
  EXPECT_THROW(ScrubRules::FromJson(R"({"rules": [{"name": "n", "kind": "pattern",
      "tag": "<SECRET>", "pattern": "x"}]})"),
               ParseError);
  EXPECT_THROW(ScrubRules::FromJson("{"), ParseError);
  EXPECT_THROW(ScrubRules::FromJson(R"({"rules": [{"name": "n", "kind": "pattern",
      "tag": "<NUMBER>", "pattern": "("}]})"),
               ParseError);
}

TEST(ScrubRulesTest, ShippedFileMatchesEmbeddedCopy) {
  const auto from_file = ScrubRules::Load(MEMLAB_TEST_DATA_DIR "/scrub_rules.json");
  EXPECT_EQ(from_file.rules().size(), ScrubRules::Shipped().rules().size());
}

}  // namespace
}  // namespace memlab
