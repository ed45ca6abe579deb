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

#include "memlab/canary.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "memlab/embedded_data.h"
#include "memlab/error.h"
#include "memlab/random.h"

namespace memlab {

std::vector<std::string> CanarySpec::Tokens() const {
  std::vector<std::string> out = prefix;
  out.insert(out.end(), completion.begin(), completion.end());
  return out;
}

std::vector<CanarySpec> LoadSuite(std::istream& in, int n) {
  if (n < 1) throw ConfigError("completion length must be >= 1");
  std::vector<CanarySpec> suite;
  std::set<int> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "canary suite line " + std::to_string(line_no);
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3)
      throw ParseError(where + ": expected 3 tab-separated fields, got " +
                       std::to_string(fields.size()));
    CanarySpec c;
    try {
      std::size_t used = 0;
      c.id = std::stoi(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument(fields[0]);
    } catch (const std::exception&) {
      throw ParseError(where + ": bad id '" + fields[0] + "'");
    }
    const std::string record = where + " (id " + std::to_string(c.id) + ")";
    if (!ids.insert(c.id).second) throw ParseError(record + ": duplicate id");
    c.prefix = Tokenize(fields[1]);
    c.completion = Tokenize(fields[2]);
    if (c.prefix.empty()) throw ParseError(record + ": empty prefix");
    if (static_cast<int>(c.completion.size()) != n)
      throw ParseError(record + ": completion has " +
                       std::to_string(c.completion.size()) + " words, expected " +
                       std::to_string(n));
    suite.push_back(std::move(c));
  }
  return suite;
}

std::vector<CanarySpec> LoadSuiteFile(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open canary suite " + path);
  return LoadSuite(in, n);
}

void SerializeSuite(const std::vector<CanarySpec>& suite, std::ostream& out) {
  auto join = [](const std::vector<std::string>& words) {
    std::string s;
    for (const auto& w : words) {
      if (!s.empty()) s += ' ';
      s += w;
    }
    return s;
  };
  for (const auto& c : suite)
    out << c.id << '\t' << join(c.prefix) << '\t' << join(c.completion) << '\n';
}

const std::vector<CanarySpec>& ShippedSuite() {
  static const std::vector<CanarySpec> suite = [] {
    std::istringstream in{std::string(embedded::CanarySuiteTsv())};
    return LoadSuite(in);
  }();
  return suite;
}

std::vector<std::string> TopSentenceStarters(const TextCorpus& corpus, int m) {
  if (corpus.empty()) throw DataError("sentence starters: empty corpus");
  if (m < 1) throw ConfigError("sentence starters: m must be >= 1");
  std::map<std::string, std::int64_t> counts;
  for (const auto& doc : corpus.documents)
    if (!doc.empty()) ++counts[doc.front()];
  if (static_cast<int>(counts.size()) < m)
    throw DataError("sentence starters: only " + std::to_string(counts.size()) +
                    " distinct starters, need " + std::to_string(m));
  std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(),
                                                           counts.end());
  // std::map iteration is already lexicographic; a stable sort keeps it as
  // the tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) out.push_back(ranked[i].first);
  return out;
}

void InjectionConfig::Validate() const {
  if (insertions < 0) throw ConfigError("insertions must be >= 0");
  if (concatenations < 1) throw ConfigError("concatenations must be >= 1");
  if (punctuation.empty()) throw ConfigError("punctuation set is empty");
  if (insertions > 0 && suffix_words.empty())
    throw ConfigError("suffix word list is empty");
  std::set<std::string> seen(suffix_words.begin(), suffix_words.end());
  if (seen.size() != suffix_words.size())
    throw ConfigError("suffix words must be distinct");
}

Document MakeInjectedExample(const CanarySpec& canary, int concatenations,
                             const std::string& punctuation,
                             const std::string& suffix_word) {
  const auto tokens = canary.Tokens();
  Document doc;
  doc.reserve(tokens.size() * concatenations + 2);
  for (int i = 0; i < concatenations; ++i)
    doc.insert(doc.end(), tokens.begin(), tokens.end());
  doc.push_back(punctuation);
  doc.push_back(suffix_word);
  return doc;
}

namespace {

int CountDuplicates(const std::vector<const Document*>& examples) {
  std::set<Document> seen;
  int dup = 0;
  for (const Document* d : examples)
    if (!seen.insert(*d).second) ++dup;
  return dup;
}

}  // namespace

InjectionResult Inject(const TextCorpus& train,
                       const std::vector<CanarySpec>& suite,
                       const InjectionConfig& config) {
  config.Validate();
  InjectionResult out;
  out.corpus = train;
  out.audit.placed.assign(suite.size(), 0);
  if (config.insertions == 0 || suite.empty()) return out;

  const std::size_t total =
      static_cast<std::size_t>(config.insertions) * suite.size();
  if (total > train.size())
    throw DataError("injection needs " + std::to_string(total) +
                    " documents but the corpus has " + std::to_string(train.size()));

  Rng rng(DeriveSeed(config.seed, Stream::kInject));
  // Partial Fisher-Yates: the first `total` slots become the placements.
  std::vector<std::size_t> index(train.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  for (std::size_t i = 0; i < total; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, index.size() - 1);
    std::swap(index[i], index[pick(rng)]);
  }
  std::uniform_int_distribution<std::size_t> punct(0, config.punctuation.size() - 1);
  std::uniform_int_distribution<std::size_t> suffix(0, config.suffix_words.size() - 1);

  std::vector<const Document*> examples;
  examples.reserve(total);
  for (std::size_t j = 0; j < suite.size(); ++j) {
    for (int r = 0; r < config.insertions; ++r) {
      const std::size_t doc = index[j * config.insertions + r];
      const std::string& p = config.punctuation[punct(rng)];
      const std::string& w = config.suffix_words[suffix(rng)];
      out.corpus.documents[doc] =
          MakeInjectedExample(suite[j], config.concatenations, p, w);
      ++out.audit.placed[j];
      out.audit.replaced_documents.push_back(doc);
      examples.push_back(&out.corpus.documents[doc]);
    }
  }
  std::sort(out.audit.replaced_documents.begin(), out.audit.replaced_documents.end());
  out.audit.duplicate_examples = CountDuplicates(examples);
  return out;
}

InjectionAudit AuditInjection(const TextCorpus& corpus,
                              const std::vector<CanarySpec>& suite,
                              const InjectionConfig& config) {
  InjectionAudit audit;
  audit.placed.assign(suite.size(), 0);
  const std::set<std::string> punct(config.punctuation.begin(),
                                    config.punctuation.end());
  const std::set<std::string> suffix(config.suffix_words.begin(),
                                     config.suffix_words.end());
  std::vector<std::vector<std::string>> tokens;
  for (const auto& c : suite) tokens.push_back(c.Tokens());

  std::vector<const Document*> examples;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const Document& doc = corpus.documents[d];
    for (std::size_t j = 0; j < suite.size(); ++j) {
      const auto& t = tokens[j];
      const std::size_t body = t.size() * config.concatenations;
      if (doc.size() != body + 2) continue;
      bool match = punct.count(doc[body]) > 0 && suffix.count(doc[body + 1]) > 0;
      for (std::size_t i = 0; match && i < body; ++i) match = doc[i] == t[i % t.size()];
      if (!match) continue;
      ++audit.placed[j];
      audit.replaced_documents.push_back(d);
      examples.push_back(&doc);
      break;
    }
  }
  audit.duplicate_examples = CountDuplicates(examples);
  return audit;
}

ScrubbedCanary ScrubCanary(const CanarySpec& canary, const ScrubRules& rules) {
  const auto tokens = canary.Tokens();
  const std::size_t boundary = canary.prefix.size();
  const ScrubResult res = ScrubWithSpans(tokens, rules);
  ScrubbedCanary out;
  // Walk input positions alongside output tokens.
  std::size_t in = 0, span = 0;
  for (const auto& tok : res.tokens) {
    std::size_t end = in + 1;
    bool scrubbed = false;
    if (span < res.spans.size() && res.spans[span].begin == in) {
      end = res.spans[span].end;
      scrubbed = true;
      ++span;
    }
    if (end <= boundary) {
      out.prompt.push_back(tok);
      out.prefix_altered |= scrubbed;
    } else {
      out.completion.push_back(tok);
      out.completion_altered |= scrubbed;
      if (in < boundary) out.prefix_altered = true;
    }
    in = end;
  }
  return out;
}

}  // namespace memlab
