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

#include "memlab/extract.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "memlab/error.h"

namespace memlab {
namespace {

template <typename Scalar>
std::vector<double> StepLogProbs(const ModelParams<Scalar>& params,
                                 LstmState<Scalar>& state, TokenId token) {
  const auto logits = Step(params, state, token);
  std::vector<double> lg(logits.data(), logits.data() + logits.size());
  return LogSoftmax(lg);
}

// Log-probabilities after consuming the whole prefix.
template <typename Scalar>
std::vector<double> PrefixLogProbs(const ModelParams<Scalar>& params,
                                   LstmState<Scalar>& state,
                                   std::span<const TokenId> prefix) {
  if (prefix.empty()) throw DataError("decoding needs a non-empty prefix");
  std::vector<double> lp;
  for (TokenId t : prefix) lp = StepLogProbs(params, state, t);
  return lp;
}

TokenId Argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (v[j] > v[best]) best = j;
  return static_cast<TokenId>(best);
}

}  // namespace

void DecodeConfig::Validate() const {
  if (n < 1) throw ConfigError("completion length n must be >= 1");
  if (beam_width < 1) throw ConfigError("beam width must be >= 1");
}

bool BeamBefore(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.ids < b.ids;
}

template <typename Scalar>
std::vector<TokenId> GreedyComplete(const ModelParams<Scalar>& params,
                                    std::span<const TokenId> prefix, int n) {
  auto state = InitialState<Scalar>(params.config());
  std::vector<double> lp = PrefixLogProbs(params, state, prefix);
  std::vector<TokenId> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(Argmax(lp));
    if (i + 1 < n) lp = StepLogProbs(params, state, out.back());
  }
  return out;
}

template <typename Scalar>
std::vector<Hypothesis> BeamComplete(const ModelParams<Scalar>& params,
                                     std::span<const TokenId> prefix, int n, int b) {
  if (n < 1 || b < 1) throw ConfigError("beam search needs n >= 1 and b >= 1");
  struct Live {
    Hypothesis hyp;
    LstmState<Scalar> state;
    std::vector<double> next;  // log-probs of the following token
  };
  Live root{{}, InitialState<Scalar>(params.config()), {}};
  root.next = PrefixLogProbs(params, root.state, prefix);
  std::vector<Live> beam;
  beam.push_back(std::move(root));

  for (int len = 1; len <= n; ++len) {
    struct Candidate {
      Hypothesis hyp;
      std::size_t parent;
    };
    std::vector<Candidate> cands;
    for (std::size_t p = 0; p < beam.size(); ++p) {
      const auto& next = beam[p].next;
      for (std::size_t t = 0; t < next.size(); ++t) {
        Candidate c{beam[p].hyp, p};
        c.hyp.ids.push_back(static_cast<TokenId>(t));
        c.hyp.log_prob += next[t];
        cands.push_back(std::move(c));
      }
    }
    const std::size_t keep = std::min<std::size_t>(b, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(),
                      [](const Candidate& x, const Candidate& y) {
                        return BeamBefore(x.hyp, y.hyp);
                      });
    cands.resize(keep);
    std::vector<Live> next_beam;
    for (auto& c : cands) {
      Live live{std::move(c.hyp), beam[c.parent].state, {}};
      if (len < n) live.next = StepLogProbs(params, live.state, live.hyp.ids.back());
      next_beam.push_back(std::move(live));
    }
    beam = std::move(next_beam);
  }
  std::vector<Hypothesis> out;
  for (auto& l : beam) out.push_back(std::move(l.hyp));
  return out;
}

template <typename Scalar>
double CompletionNll(const ModelParams<Scalar>& params,
                     std::span<const TokenId> prefix,
                     std::span<const TokenId> completion) {
  if (completion.empty()) throw DataError("empty completion");
  auto state = InitialState<Scalar>(params.config());
  std::vector<double> lp = PrefixLogProbs(params, state, prefix);
  double total = 0.0;
  for (std::size_t i = 0; i < completion.size(); ++i) {
    const TokenId t = completion[i];
    if (t < 0 || static_cast<std::size_t>(t) >= lp.size())
      throw DataError("completion id out of range");
    total -= lp[t];
    if (i + 1 < completion.size()) lp = StepLogProbs(params, state, t);
  }
  return total / static_cast<double>(completion.size());
}

template <typename Scalar>
ExtractionReport RunSuite(const ModelParams<Scalar>& params,
                          const std::vector<CanarySpec>& suite,
                          const Vocabulary& vocab, const SuiteOptions& options) {
  options.decode.Validate();
  if (suite.empty()) throw DataError("empty canary suite");
  if (vocab.size() != params.config().vocab_size)
    throw ConfigError("vocabulary size does not match the model");
  const int n = options.decode.n;
  ExtractionReport report;
  double nll_sum = 0.0;
  int nll_count = 0;
  for (const auto& canary : suite) {
    if (static_cast<int>(canary.completion.size()) != n)
      throw DataError("canary " + std::to_string(canary.id) + " completion length != n");
    CanaryOutcome o;
    o.id = canary.id;
    std::vector<std::string> prompt = canary.prefix;
    if (options.scrub != nullptr) {
      ScrubbedCanary sc = ScrubCanary(canary, *options.scrub);
      o.prefix_scrubbed = sc.prefix_altered;
      o.completion_scrubbed = sc.completion_altered;
      prompt = std::move(sc.prompt);
    }
    const std::vector<TokenId> prompt_ids = vocab.Encode(prompt);
    const std::vector<TokenId> target = vocab.Encode(canary.completion);
    for (std::size_t i = 0; i < target.size(); ++i)
      if (target[i] == vocab.unknown_id() && canary.completion[i] != kUnknownToken)
        o.completion_oov = true;

    if (!prompt_ids.empty()) {
      const auto greedy = GreedyComplete(params, prompt_ids, n);
      o.greedy_output = vocab.Decode(greedy);
      o.completion_nll = CompletionNll(params, prompt_ids, target);
      if (o.extractable()) {
        o.greedy_match = greedy == target;
        for (const auto& h : BeamComplete(params, prompt_ids, n, options.decode.beam_width))
          o.beam_match |= h.ids == target;
      }
    } else {
      // Scrubbing swallowed the whole prompt; nothing to condition on.
      o.completion_nll = std::log(static_cast<double>(vocab.size()));
    }

    report.canaries_greedy += o.greedy_match;
    report.canaries_beam += o.beam_match;
    report.non_extractable += !o.extractable();
    report.prefixes_scrubbed += o.prefix_scrubbed;
    report.beam_below_greedy += o.greedy_match && !o.beam_match;
    if (o.extractable() || options.nll_includes_non_extractable) {
      nll_sum += o.completion_nll;
      ++nll_count;
    }
    report.canaries.push_back(std::move(o));
  }
  report.mean_completion_nll = nll_count > 0 ? nll_sum / nll_count : 0.0;
  return report;
}

std::string ExtractionReport::ToJson(bool per_canary) const {
  nlohmann::json j;
  j["canaries_greedy"] = canaries_greedy;
  j["canaries_beam"] = canaries_beam;
  j["mean_completion_nll"] = mean_completion_nll;
  j["non_extractable"] = non_extractable;
  j["prefixes_scrubbed"] = prefixes_scrubbed;
  j["beam_below_greedy"] = beam_below_greedy;
  if (per_canary) {
    auto& arr = j["canaries"] = nlohmann::json::array();
    for (const auto& o : canaries) {
      arr.push_back({{"id", o.id},
                     {"greedy_match", o.greedy_match},
                     {"beam_match", o.beam_match},
                     {"completion_nll", o.completion_nll},
                     {"completion_scrubbed", o.completion_scrubbed},
                     {"completion_oov", o.completion_oov},
                     {"prefix_scrubbed", o.prefix_scrubbed},
                     {"greedy_output", o.greedy_output}});
    }
  }
  return j.dump(2) + "\n";
}

#define MEMLAB_INSTANTIATE_EXTRACT(S)                                              \
  template std::vector<TokenId> GreedyComplete<S>(const ModelParams<S>&,           \
                                                  std::span<const TokenId>, int);  \
  template std::vector<Hypothesis> BeamComplete<S>(const ModelParams<S>&,          \
                                                   std::span<const TokenId>, int,  \
                                                   int);                           \
  template double CompletionNll<S>(const ModelParams<S>&, std::span<const TokenId>, \
                                   std::span<const TokenId>);                      \
  template ExtractionReport RunSuite<S>(const ModelParams<S>&,                     \
                                        const std::vector<CanarySpec>&,            \
                                        const Vocabulary&, const SuiteOptions&);

MEMLAB_INSTANTIATE_EXTRACT(float)
MEMLAB_INSTANTIATE_EXTRACT(double)

}  // namespace memlab
