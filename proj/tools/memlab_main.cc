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

// memlab: command-line front end for the memorization harness.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "memlab/analysis.h"
#include "memlab/canary.h"
#include "memlab/checkpoint.h"
#include "memlab/corpus.h"
#include "memlab/error.h"
#include "memlab/extract.h"
#include "memlab/results.h"
#include "memlab/runner.h"
#include "memlab/scrub.h"
#include "memlab/vocabulary.h"

namespace fs = std::filesystem;
using namespace memlab;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "memlab_out";
  bool resume = false;
  bool quiet = false;
};

LogFn Logger(const Globals& g) {
  if (g.quiet) return nullptr;
  return [](const std::string& msg) { std::cerr << msg << std::endl; };
}

fs::path OutDir(const Globals& g) {
  fs::create_directories(g.out_dir);
  return g.out_dir;
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

GridConfig LoadConfigOrDefault(const Globals& g) {
  return g.config.empty() ? DeskScaleGrid() : LoadGridFile(g.config);
}

// Picks one experiment from the config: the one named by `id`, or the only
// one present.
ExperimentSpec PickSpec(const Globals& g, const std::string& id) {
  if (g.config.empty()) {
    ExperimentSpec spec;
    spec.id = id.empty() ? "run" : id;
    return spec;
  }
  GridConfig grid = LoadGridFile(g.config);
  if (id.empty()) {
    if (grid.specs.size() != 1)
      throw ConfigError(g.config + " defines " + std::to_string(grid.specs.size()) +
                        " experiments; choose one with --id");
    return grid.specs.front();
  }
  for (auto& s : grid.specs)
    if (s.id == id) return s;
  throw ConfigError("no experiment '" + id + "' in " + g.config);
}

TextCorpus CorpusFrom(const std::string& path, const CorpusSource& fallback) {
  if (!path.empty()) return ReadCorpusFile(path);
  return MakeSyntheticCorpus(fallback.seed, fallback.synthetic_tokens);
}

std::vector<ResultRow> RowsFrom(const std::string& path, bool lstm_only) {
  if (path.empty()) return lstm_only ? ReferenceLstmRows() : ReferenceResults();
  return ParseCsvFile(path);
}

void PrintRow(const ResultRow& row) {
  std::cout << kResultsHeader << "\n" << FormatRow(row) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memlab: canary memorization experiments for word-level LSTM models"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON experiment or grid config")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override the experiment (or grid) seed");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--resume", g.resume, "Reuse completed grid rows");
  app.add_flag("-q,--quiet", g.quiet, "No progress output");

  // vocab
  auto* vocab = app.add_subcommand("vocab", "Build a vocabulary from a corpus");
  std::string vocab_corpus, vocab_out;
  int vocab_size = 0;
  vocab->add_option("--corpus", vocab_corpus, "Corpus file (default: synthetic)");
  vocab->add_option("--size", vocab_size, "Vocabulary size (default: from config)");
  vocab->add_option("-o,--output", vocab_out, "Output file (default: <out-dir>/vocab.txt)");

  // scrub
  auto* scrub = app.add_subcommand("scrub", "Replace identifying spans with tag tokens");
  std::string scrub_in, scrub_out, scrub_rules;
  scrub->add_option("-i,--input", scrub_in, "Corpus file")->required();
  scrub->add_option("-o,--output", scrub_out, "Output file (default: stdout)");
  scrub->add_option("--rules", scrub_rules, "Rule file (default: shipped rules)");

  // inject
  auto* inject = app.add_subcommand("inject", "Plant the canary suite into a corpus");
  std::string inject_in, inject_out, inject_suite;
  InjectionConfig inj;
  int starters = kDefaultSentenceStarters;
  inject->add_option("-i,--input", inject_in, "Corpus file")->required();
  inject->add_option("-o,--output", inject_out, "Output corpus")->required();
  inject->add_option("--suite", inject_suite, "Canary suite TSV (default: shipped)");
  inject->add_option("--insertions", inj.insertions, "Examples per canary")->required();
  inject->add_option("--concatenations", inj.concatenations, "Copies per example")
      ->capture_default_str();
  inject->add_option("--suffix-words", starters, "Number of sentence starters to sample")
      ->capture_default_str();

  // train / dp-train
  std::string run_id;
  std::optional<int> run_insertions, run_hidden;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--id", run_id, "Experiment id within the config");
    sub->add_option("--insertions", run_insertions, "Override insertions per canary");
    sub->add_option("--hidden", run_hidden, "Override hidden size");
  };
  auto* train = app.add_subcommand("train", "Train one model and measure extraction");
  add_run_options(train);
  auto* dp_train = app.add_subcommand("dp-train", "Train one model with DP-SGD");
  add_run_options(dp_train);
  std::optional<double> dp_epsilon, dp_sigma, dp_clip;
  std::optional<int> dp_batch;
  dp_train->add_option("--epsilon", dp_epsilon, "Target epsilon (calibrates sigma)");
  dp_train->add_option("--noise-multiplier", dp_sigma, "Fixed noise multiplier");
  dp_train->add_option("--clip-norm", dp_clip, "Per-example clipping norm");
  dp_train->add_option("--batch-size", dp_batch, "Expected batch size");

  // extract
  auto* extract = app.add_subcommand("extract", "Run the canary suite against a checkpoint");
  std::string ckpt_path, ckpt_vocab, extract_suite, extract_rules;
  bool extract_scrub = false;
  DecodeConfig decode;
  extract->add_option("--checkpoint", ckpt_path, "Model checkpoint")->required();
  extract->add_option("--vocab", ckpt_vocab, "Vocabulary file")->required();
  extract->add_option("--suite", extract_suite, "Canary suite TSV (default: shipped)");
  extract->add_flag("--scrub", extract_scrub, "Scrub prompts as the training data was");
  extract->add_option("--rules", extract_rules, "Rule file for --scrub");
  extract->add_option("--beam-width", decode.beam_width)->capture_default_str();

  // grid
  auto* grid = app.add_subcommand("grid", "Run every experiment of a grid config");
  bool no_artifacts = false;
  grid->add_flag("--no-artifacts", no_artifacts, "Only write result rows");

  // curves
  auto* curves = app.add_subcommand("curves", "Extraction-vs-insertions series from results");
  std::string curves_in, group_by = "hidden_size", metric = "greedy", curves_out;
  curves->add_option("--results", curves_in, "Results CSV (default: shipped reference)");
  curves->add_option("--group-by", group_by)->capture_default_str();
  curves->add_option("--metric", metric)
      ->check(CLI::IsMember({"greedy", "beam"}))
      ->capture_default_str();
  curves->add_option("-o,--output", curves_out, "Output (default: <out-dir>/curves.csv)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Permutation importance over result rows");
  std::string analyze_in;
  ImportanceOptions imp;
  analyze->add_option("--results", analyze_in, "Results CSV (default: shipped LSTM rows)");
  analyze->add_option("--target", imp.target)->capture_default_str();
  analyze->add_option("--repeats", imp.repeats)->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "Summarize a results CSV");
  std::string report_in;
  report->add_option("--results", report_in, "Results CSV (default: <out-dir>/results.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (vocab->parsed()) {
      ExperimentSpec spec = PickSpec(g, "");
      const TextCorpus corpus = CorpusFrom(vocab_corpus, spec.corpus);
      const Vocabulary v = Vocabulary::Build(corpus, vocab_size > 0 ? vocab_size : spec.vocab_size);
      const fs::path path = vocab_out.empty() ? OutDir(g) / "vocab.txt" : fs::path(vocab_out);
      std::ofstream out(path);
      v.Save(out);
      if (!out) throw IoError("cannot write " + path.string());
      std::cerr << v.size() << " tokens -> " << path.string() << "\n";
    } else if (scrub->parsed()) {
      const ScrubRules rules =
          scrub_rules.empty() ? ScrubRules::Shipped() : ScrubRules::Load(scrub_rules);
      const TextCorpus scrubbed = Scrub(ReadCorpusFile(scrub_in), rules);
      if (scrub_out.empty()) {
        WriteCorpus(scrubbed, std::cout);
      } else {
        WriteCorpusFile(scrubbed, scrub_out);
      }
    } else if (inject->parsed()) {
      const TextCorpus corpus = ReadCorpusFile(inject_in);
      const auto suite = inject_suite.empty() ? ShippedSuite() : LoadSuiteFile(inject_suite);
      inj.seed = g.seed.value_or(0);
      if (inj.insertions > 0) inj.suffix_words = TopSentenceStarters(corpus, starters);
      const InjectionResult result = Inject(corpus, suite, inj);
      WriteCorpusFile(result.corpus, inject_out);
      int placed = 0;
      for (int n : result.audit.placed) placed += n;
      std::cerr << placed << " examples placed, "
                << result.audit.duplicate_examples << " duplicates\n";
    } else if (train->parsed() || dp_train->parsed()) {
      ExperimentSpec spec = PickSpec(g, run_id);
      if (g.seed) spec.seed = *g.seed;
      if (run_insertions) spec.injection.insertions = *run_insertions;
      if (run_hidden) spec.model.hidden_size = *run_hidden;
      if (dp_train->parsed()) {
        DPConfig dp = spec.dp.value_or(DPConfig{});
        if (dp_epsilon) dp.target_epsilon = *dp_epsilon;
        if (dp_sigma) {
          dp.noise_multiplier = *dp_sigma;
          dp.target_epsilon.reset();
        }
        if (dp_clip) dp.clip_norm = *dp_clip;
        if (dp_batch) dp.batch_size = *dp_batch;
        spec.dp = dp;
      } else if (spec.dp) {
        throw ConfigError("config enables DP; use the dp-train subcommand");
      }
      RunOptions options;
      options.log = Logger(g);
      options.artifacts_dir = (OutDir(g) / "runs").string();
      const ExperimentOutput out = RunExperiment(spec, options);
      EmitCsvFile({out.row}, (OutDir(g) / (spec.id + ".csv")).string());
      PrintRow(out.row);
    } else if (extract->parsed()) {
      const Checkpoint<float> ckpt = LoadCheckpoint<float>(ckpt_path);
      std::ifstream vin(ckpt_vocab);
      if (!vin) throw IoError("cannot open " + ckpt_vocab);
      const Vocabulary v = Vocabulary::Load(vin);
      const auto suite = extract_suite.empty() ? ShippedSuite() : LoadSuiteFile(extract_suite);
      ScrubRules rules;
      SuiteOptions so;
      so.decode = decode;
      if (extract_scrub) {
        rules = extract_rules.empty() ? ScrubRules::Shipped() : ScrubRules::Load(extract_rules);
        so.scrub = &rules;
      }
      const ExtractionReport r = RunSuite(ckpt.params, suite, v, so);
      std::cout << r.ToJson(/*per_canary=*/true);
    } else if (grid->parsed()) {
      GridConfig config = LoadConfigOrDefault(g);
      if (g.seed) config.grid_seed = *g.seed;
      GridOptions options;
      options.out_dir = OutDir(g).string();
      options.resume = g.resume;
      options.save_artifacts = !no_artifacts;
      options.log = Logger(g);
      const GridResult result = RunGrid(config.specs, config.grid_seed, options);
      std::cerr << result.rows.size() << " rows (" << result.reused << " reused), "
                << result.failures.size() << " failed\n";
      for (const auto& f : result.failures) std::cerr << "  " << f.id << ": " << f.message << "\n";
      if (!result.rows.empty()) EmitCsv(result.rows, std::cout);
      return result.failures.empty() ? 0 : 1;
    } else if (curves->parsed()) {
      const CurveSet set = EmitCurves(RowsFrom(curves_in, false), group_by,
                                      metric == "beam" ? CurveMetric::kBeam : CurveMetric::kGreedy);
      for (const auto& w : set.warnings) std::cerr << "warning: " << w << "\n";
      std::ostringstream out;
      WriteCurvesCsv(set, out);
      const fs::path path = curves_out.empty() ? OutDir(g) / "curves.csv" : fs::path(curves_out);
      WriteFile(path, out.str());
      std::cout << out.str();
    } else if (analyze->parsed()) {
      imp.seed = g.seed.value_or(0);
      const ImportanceResult r = PermutationImportance(RowsFrom(analyze_in, true), imp);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << r.ToJson();
    } else if (report->parsed()) {
      const std::string path =
          report_in.empty() ? (fs::path(g.out_dir) / "results.csv").string() : report_in;
      const auto rows = ParseCsvFile(path);
      std::cout << "| id | hidden | insertions | greedy | beam | completion NLL | test NLL |\n"
                << "|---|---|---|---|---|---|---|\n";
      for (const auto& r : rows) {
        std::cout << "| " << r.id << " | " << ColumnValue(r, "hidden_size") << " | "
                  << r.insertions << " | " << r.canaries_greedy << " | " << r.canaries_beam
                  << " | " << FormatDouble(r.completion_nll) << " | "
                  << FormatDouble(r.test_nll) << " |\n";
      }
      const CurveSet set = EmitCurves(rows, "hidden_size");
      for (const auto& w : set.warnings) std::cout << "\nwarning: " << w << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "memlab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "memlab: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
