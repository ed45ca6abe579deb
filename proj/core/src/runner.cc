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

#include "memlab/runner.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "memlab/checkpoint.h"
#include "memlab/corpus.h"
#include "memlab/error.h"
#include "memlab/random.h"
#include "memlab/scrub.h"

namespace memlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON <-> spec.

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
  }

  template <typename T>
  void Get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }
  template <typename T>
  void Get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    Get(key, v);
    out = v;
  }
  const json* Child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return nullptr;
    return &j_.at(key);
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const char* ScheduleName(Schedule s) {
  return s == Schedule::kConstant ? "constant" : "warmup_decay";
}

Schedule ParseSchedule(const std::string& s) {
  if (s == "constant") return Schedule::kConstant;
  if (s == "warmup_decay") return Schedule::kWarmupDecay;
  throw ConfigError("unknown schedule '" + s + "'");
}

const char* ReductionName(LossReduction r) {
  return r == LossReduction::kExampleMean ? "example_mean" : "token_mean";
}

LossReduction ParseReduction(const std::string& s) {
  if (s == "example_mean") return LossReduction::kExampleMean;
  if (s == "token_mean") return LossReduction::kTokenMean;
  throw ConfigError("unknown loss reduction '" + s + "'");
}

const char* SamplingName(DpSampling s) {
  return s == DpSampling::kShuffledBatches ? "shuffled_batches" : "poisson";
}

DpSampling ParseSampling(const std::string& s) {
  if (s == "poisson") return DpSampling::kPoisson;
  if (s == "shuffled_batches") return DpSampling::kShuffledBatches;
  throw ConfigError("unknown DP sampling '" + s + "'");
}

// JSON numbers cannot hold infinity; "inf" stands in for it.
double ReadClip(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf")
    return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

ordered_json ToJson(const ExperimentSpec& s) {
  ordered_json j;
  j["id"] = s.id;
  j["seed"] = s.seed;
  j["corpus"] = {{"path", s.corpus.path},
                 {"synthetic_tokens", s.corpus.synthetic_tokens},
                 {"seed", s.corpus.seed},
                 {"split", s.corpus.split}};
  j["vocab_size"] = s.vocab_size;
  j["scrub"] = s.scrub;
  j["scrub_rules"] = s.scrub_rules_path;
  j["suite"] = s.suite_path;
  j["model"] = {{"hidden_size", s.model.hidden_size},
                {"max_seq_len", s.model.max_seq_len},
                {"init_scale", s.model.init_scale}};
  const TrainConfig& t = s.train;
  j["train"] = {{"max_lr", t.max_lr},
                {"batch_size", t.batch_size},
                {"grad_clip", std::isfinite(t.grad_clip) ? ordered_json(t.grad_clip)
                                                         : ordered_json("inf")},
                {"l2_lambda", t.l2_lambda},
                {"dropout", t.dropout},
                {"epochs", t.epochs},
                {"eval_checkpoints", t.eval_checkpoints},
                {"schedule", ScheduleName(t.schedule)},
                {"reduction", ReductionName(t.reduction)},
                {"adam_beta1", t.adam_beta1},
                {"adam_beta2", t.adam_beta2},
                {"adam_epsilon", t.adam_epsilon},
                {"eval_batch_size", t.eval_batch_size}};
  j["injection"] = {{"insertions", s.injection.insertions},
                    {"concatenations", s.injection.concatenations},
                    {"suffix_word_count", s.suffix_word_count},
                    {"suffix_words", s.injection.suffix_words},
                    {"punctuation", s.injection.punctuation}};
  if (s.dp) {
    const DPConfig& d = *s.dp;
    ordered_json dj = {{"clip_norm", d.clip_norm},
                       {"noise_multiplier", d.noise_multiplier},
                       {"batch_size", d.batch_size},
                       {"learning_rate", d.learning_rate},
                       {"microbatch_size", d.microbatch_size},
                       {"sampling", SamplingName(d.sampling)}};
    dj["target_epsilon"] = d.target_epsilon ? ordered_json(*d.target_epsilon) : ordered_json();
    dj["delta"] = d.delta ? ordered_json(*d.delta) : ordered_json();
    j["dp"] = dj;
  } else {
    j["dp"] = nullptr;
  }
  j["decode"] = {{"n", s.decode.n}, {"beam_width", s.decode.beam_width}};
  j["nll_includes_non_extractable"] = s.nll_includes_non_extractable;
  return j;
}

ExperimentSpec FromJson(const json& j) {
  ExperimentSpec s;
  {
    Reader r(j, "spec");
    r.Get("id", s.id);
    r.Get("seed", s.seed);
    r.Get("vocab_size", s.vocab_size);
    r.Get("scrub", s.scrub);
    r.Get("scrub_rules", s.scrub_rules_path);
    r.Get("suite", s.suite_path);
    r.Get("nll_includes_non_extractable", s.nll_includes_non_extractable);
    if (const json* c = r.Child("corpus")) {
      Reader rc(*c, "corpus");
      rc.Get("path", s.corpus.path);
      rc.Get("synthetic_tokens", s.corpus.synthetic_tokens);
      rc.Get("seed", s.corpus.seed);
      rc.Get("split", s.corpus.split);
    }
    if (const json* c = r.Child("model")) {
      Reader rm(*c, "model");
      rm.Get("hidden_size", s.model.hidden_size);
      rm.Get("max_seq_len", s.model.max_seq_len);
      rm.Get("init_scale", s.model.init_scale);
    }
    if (const json* c = r.Child("train")) {
      Reader rt(*c, "train");
      TrainConfig& t = s.train;
      rt.Get("max_lr", t.max_lr);
      rt.Get("batch_size", t.batch_size);
      if (const json* clip = rt.Child("grad_clip")) {
        try {
          t.grad_clip = ReadClip(*clip);
        } catch (const json::exception& e) {
          throw ConfigError(std::string("train.grad_clip: ") + e.what());
        }
      }
      rt.Get("l2_lambda", t.l2_lambda);
      rt.Get("dropout", t.dropout);
      rt.Get("epochs", t.epochs);
      rt.Get("eval_checkpoints", t.eval_checkpoints);
      std::string schedule = ScheduleName(t.schedule), reduction = ReductionName(t.reduction);
      rt.Get("schedule", schedule);
      rt.Get("reduction", reduction);
      t.schedule = ParseSchedule(schedule);
      t.reduction = ParseReduction(reduction);
      rt.Get("adam_beta1", t.adam_beta1);
      rt.Get("adam_beta2", t.adam_beta2);
      rt.Get("adam_epsilon", t.adam_epsilon);
      rt.Get("eval_batch_size", t.eval_batch_size);
    }
    if (const json* c = r.Child("injection")) {
      Reader ri(*c, "injection");
      ri.Get("insertions", s.injection.insertions);
      ri.Get("concatenations", s.injection.concatenations);
      ri.Get("suffix_word_count", s.suffix_word_count);
      ri.Get("suffix_words", s.injection.suffix_words);
      ri.Get("punctuation", s.injection.punctuation);
    }
    if (const json* c = r.Child("dp")) {
      Reader rd(*c, "dp");
      DPConfig d;
      rd.Get("clip_norm", d.clip_norm);
      rd.Get("noise_multiplier", d.noise_multiplier);
      rd.Get("target_epsilon", d.target_epsilon);
      rd.Get("batch_size", d.batch_size);
      rd.Get("delta", d.delta);
      rd.Get("learning_rate", d.learning_rate);
      rd.Get("microbatch_size", d.microbatch_size);
      std::string sampling = SamplingName(d.sampling);
      rd.Get("sampling", sampling);
      d.sampling = ParseSampling(sampling);
      s.dp = d;
    }
    if (const json* c = r.Child("decode")) {
      Reader rx(*c, "decode");
      rx.Get("n", s.decode.n);
      rx.Get("beam_width", s.decode.beam_width);
    }
  }
  s.model.dropout = s.train.dropout;
  s.Validate();
  return s;
}

json ParseJson(std::string_view text, const std::string& what) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

// "model.hidden_size" -> {"model": {"hidden_size": value}}
json PathPatch(const std::string& path, const json& value) {
  json patch = value;
  std::size_t end = path.size();
  for (;;) {
    const std::size_t dot = path.rfind('.', end - 1);
    const std::string key =
        path.substr(dot == std::string::npos ? 0 : dot + 1,
                    end - (dot == std::string::npos ? 0 : dot + 1));
    if (key.empty()) throw ConfigError("bad axis key '" + path + "'");
    patch = json{{key, patch}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  return patch;
}

std::string AxisLabel(const std::string& path, const json& value) {
  const std::size_t dot = path.rfind('.');
  std::string v = value.is_string() ? value.get<std::string>() : value.dump();
  for (char& c : v)
    if (c == ',' || c == '/' || c == ' ' || c == '"') c = '_';
  return path.substr(dot == std::string::npos ? 0 : dot + 1) + "-" + v;
}

// ---------------------------------------------------------------------------
// Running.

template <typename F>
auto Stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

void ExperimentSpec::Validate() const {
  if (id.empty() || id.find_first_of(",/\\\n\r\t ") != std::string::npos)
    throw ConfigError("experiment id must be nonempty without commas, slashes or spaces");
  if (corpus.path.empty() && corpus.synthetic_tokens < kMinSyntheticTokens)
    throw ConfigError("synthetic corpus needs >= " + std::to_string(kMinSyntheticTokens) +
                      " tokens");
  if (vocab_size <= static_cast<int>(SpecialTokens().size()))
    throw ConfigError("vocab_size must exceed the number of special tokens");
  if (suffix_word_count < 1) throw ConfigError("suffix_word_count must be >= 1");
  ModelConfig m = model;
  m.vocab_size = vocab_size;
  m.dropout = train.dropout;
  m.Validate();
  train.Validate();
  InjectionConfig inj = injection;
  if (inj.suffix_words.empty()) inj.suffix_words = {"x"};
  inj.Validate();
  if (dp) dp->Validate();
  decode.Validate();
}

ExperimentSpec SpecFromJson(std::string_view text) {
  return FromJson(ParseJson(text, "experiment spec"));
}

std::string SpecToJson(const ExperimentSpec& spec) { return ToJson(spec).dump(2) + "\n"; }

GridConfig GridFromJson(std::string_view text) {
  const json doc = ParseJson(text, "grid config");
  if (!doc.is_object()) throw ConfigError("grid config must be an object");
  GridConfig grid;
  if (!doc.contains("base")) {
    grid.specs.push_back(FromJson(doc));
    grid.grid_seed = grid.specs.back().seed;
    return grid;
  }
  for (const auto& [key, value] : doc.items())
    if (key != "grid_seed" && key != "base" && key != "axes" && key != "experiments")
      throw ConfigError("grid config: unknown key '" + key + "'");
  grid.grid_seed = doc.value("grid_seed", std::uint64_t{0});
  const json& base = doc.at("base");
  const std::string base_id = base.value("id", std::string("run"));

  if (doc.contains("axes")) {
    // Axes vary in the order written, the last one fastest.
    const auto axes = ordered_json::parse(std::string(text), nullptr, true, true).at("axes");
    std::vector<std::pair<std::string, std::vector<json>>> dims;
    std::size_t total = 1;
    for (const auto& [key, values] : axes.items()) {
      if (!values.is_array() || values.empty())
        throw ConfigError("grid axis '" + key + "' must be a nonempty list");
      std::vector<json> vs;
      for (const auto& v : values) vs.push_back(json::parse(v.dump()));
      total *= vs.size();
      dims.emplace_back(key, std::move(vs));
    }
    for (std::size_t n = 0; n < total; ++n) {
      json spec = base;
      std::string id = base_id;
      std::size_t rest = n, stride = total;
      for (const auto& [key, values] : dims) {
        stride /= values.size();
        const json& v = values[rest / stride];
        rest %= stride;
        spec.merge_patch(PathPatch(key, v));
        id += "_" + AxisLabel(key, v);
      }
      spec["id"] = id;
      grid.specs.push_back(FromJson(spec));
    }
  }
  if (doc.contains("experiments")) {
    for (const auto& e : doc.at("experiments")) {
      if (!e.contains("id")) throw ConfigError("grid experiment without an id");
      json spec = base;
      spec.merge_patch(e);
      grid.specs.push_back(FromJson(spec));
    }
  }
  if (grid.specs.empty()) throw ConfigError("grid config defines no experiments");
  std::set<std::string> ids;
  for (const auto& s : grid.specs)
    if (!ids.insert(s.id).second) throw ConfigError("duplicate experiment id '" + s.id + "'");
  return grid;
}

GridConfig LoadGridFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return GridFromJson(ss.str());
}

GridConfig DeskScaleGrid() {
  return GridFromJson(R"({
    "grid_seed": 2022,
    "base": {
      "id": "desk",
      "vocab_size": 5000,
      "corpus": {"synthetic_tokens": 2000000, "seed": 1},
      "train": {"max_lr": 0.005, "batch_size": 32},
      "injection": {"concatenations": 4}
    },
    "axes": {
      "model.hidden_size": [64, 128],
      "injection.insertions": [1, 8, 32, 64]
    }
  })");
}

ExperimentOutput RunExperiment(const ExperimentSpec& spec_in, const RunOptions& options) {
  ExperimentSpec spec = spec_in;
  spec.model.dropout = spec.train.dropout;
  Stage("config", [&] {
    spec.Validate();
    return 0;
  });
  auto log = [&](const std::string& msg) {
    if (options.log) options.log("[" + spec.id + "] " + msg);
  };
  const std::uint64_t seed = spec.seed;
  spec.model.seed = seed;
  spec.train.seed = seed;
  spec.injection.seed = seed;
  if (spec.dp) spec.dp->seed = seed;

  ExperimentOutput out;
  const std::vector<CanarySpec> suite = Stage("suite", [&] {
    return spec.suite_path.empty() ? ShippedSuite()
                                   : LoadSuiteFile(spec.suite_path, spec.decode.n);
  });

  CorpusSplit split = Stage("corpus", [&] {
    const TextCorpus corpus = spec.corpus.path.empty()
                                  ? MakeSyntheticCorpus(spec.corpus.seed,
                                                        spec.corpus.synthetic_tokens)
                                  : ReadCorpusFile(spec.corpus.path);
    return Split(corpus, spec.corpus.split, spec.corpus.seed);
  });
  log("corpus: " + std::to_string(split.train.size()) + " train docs, " +
      std::to_string(split.train.TokenCount()) + " tokens");

  Stage("inject", [&] {
    InjectionConfig inj = spec.injection;
    if (inj.suffix_words.empty() && inj.insertions > 0)
      inj.suffix_words = TopSentenceStarters(split.train, spec.suffix_word_count);
    InjectionResult injected = Inject(split.train, suite, inj);
    split.train = std::move(injected.corpus);
    out.audit = std::move(injected.audit);
    return 0;
  });

  const ScrubRules* rules = nullptr;
  ScrubRules loaded_rules;
  if (spec.scrub) {
    Stage("scrub", [&] {
      if (spec.scrub_rules_path.empty()) {
        rules = &ScrubRules::Shipped();
      } else {
        loaded_rules = ScrubRules::Load(spec.scrub_rules_path);
        rules = &loaded_rules;
      }
      split.train = Scrub(split.train, *rules);
      split.valid = Scrub(split.valid, *rules);
      split.test = Scrub(split.test, *rules);
      return 0;
    });
  }

  out.vocab = Stage("vocab", [&] { return Vocabulary::Build(split.train, spec.vocab_size); });
  spec.model.vocab_size = out.vocab.size();
  const EncodedCorpus train = out.vocab.Encode(split.train);
  const EncodedCorpus valid = out.vocab.Encode(split.valid);
  const EncodedCorpus test = out.vocab.Encode(split.test);
  split = {};

  const auto start = std::chrono::steady_clock::now();
  TrainHooks<float> hooks;
  hooks.on_eval = [&](std::int64_t step, double nll) {
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log("step " + std::to_string(step) + " valid_nll " + FormatDouble(nll) + " (" +
        std::to_string(static_cast<int>(sec)) + "s)");
  };
  const ModelParams<float> init = InitParams<float>(spec.model);
  if (spec.dp) {
    auto result = Stage("dp-train", [&] {
      return DpTrainEpoch(init, train, valid, *spec.dp, spec.train, hooks);
    });
    out.params = std::move(result.best);
    out.report = std::move(result.report);
    out.noise_multiplier = result.noise_multiplier;
    out.ledger = std::move(result.ledger);
    log("dp: sigma " + FormatDouble(out.noise_multiplier) + " epsilon " +
        FormatDouble(out.ledger->Epsilon()));
  } else {
    auto result = Stage("train", [&] { return TrainEpoch(init, train, valid, spec.train, hooks); });
    out.params = std::move(result.best);
    out.report = std::move(result.report);
  }

  Stage("evaluate", [&] {
    const EvalResult eval = Evaluate(out.params, test, spec.train.eval_batch_size);
    out.report.test_nll = eval.nll;
    out.report.test_accuracy = eval.accuracy;
    return 0;
  });

  out.extraction = Stage("extract", [&] {
    SuiteOptions so;
    so.decode = spec.decode;
    so.scrub = rules;
    so.nll_includes_non_extractable = spec.nll_includes_non_extractable;
    return RunSuite(out.params, suite, out.vocab, so);
  });
  out.prefixes_scrubbed = out.extraction.prefixes_scrubbed;
  log("extracted greedy " + std::to_string(out.extraction.canaries_greedy) + " beam " +
      std::to_string(out.extraction.canaries_beam) + ", test_nll " +
      FormatDouble(out.report.test_nll));

  ResultRow& row = out.row;
  row.id = spec.id;
  row.hidden_size = spec.model.hidden_size;
  row.insertions = spec.injection.insertions;
  row.vocab_size = spec.vocab_size;
  row.l2_lambda = spec.train.l2_lambda;
  row.dropout = spec.train.dropout;
  row.scrub = spec.scrub;
  if (out.ledger) {
    const double eps = out.ledger->Epsilon();
    if (std::isfinite(eps)) row.dp_epsilon = eps;
  }
  row.canaries_greedy = out.extraction.canaries_greedy;
  row.canaries_beam = out.extraction.canaries_beam;
  row.completion_nll = out.extraction.mean_completion_nll;
  row.test_nll = out.report.test_nll;
  row.test_accuracy = out.report.test_accuracy;

  if (!options.artifacts_dir.empty()) {
    Stage("artifacts", [&] {
      const fs::path dir = fs::path(options.artifacts_dir) / spec.id;
      fs::create_directories(dir);
      WriteText(dir / "spec.json", SpecToJson(spec_in));
      std::ostringstream vocab;
      out.vocab.Save(vocab);
      WriteText(dir / "vocab.txt", vocab.str());
      SaveCheckpoint(out.params, out.report.steps, (dir / "model.ckpt").string());
      WriteText(dir / "run.json", RunRecordJson(spec_in, out));
      if (out.ledger) out.ledger->Save((dir / "ledger.json").string());
      return 0;
    });
  }
  return out;
}

std::string RunRecordJson(const ExperimentSpec& spec, const ExperimentOutput& out) {
  ordered_json j;
  j["spec"] = ToJson(spec);
  j["adam"] = {{"beta1", spec.train.adam_beta1},
               {"beta2", spec.train.adam_beta2},
               {"epsilon", spec.train.adam_epsilon}};
  j["row"] = FormatRow(out.row);
  j["train"] = {{"steps", out.report.steps},
                {"checkpoint_steps", out.report.checkpoint_steps},
                {"valid_nll", out.report.valid_nll},
                {"selected", out.report.selected},
                {"test_nll", out.report.test_nll},
                {"test_accuracy", out.report.test_accuracy}};
  j["injection_audit"] = {{"placed", out.audit.placed},
                          {"replaced_documents", out.audit.replaced_documents.size()},
                          {"duplicate_examples", out.audit.duplicate_examples}};
  j["extraction"] = ordered_json::parse(out.extraction.ToJson());
  j["vocab_size"] = out.vocab.size();
  if (out.ledger) {
    j["dp"] = {{"noise_multiplier", out.noise_multiplier},
               {"ledger", ordered_json::parse(out.ledger->ToJson())}};
  }
  return j.dump(2) + "\n";
}

std::uint64_t GridMemberSeed(std::uint64_t grid_seed, std::string_view id) {
  return DeriveSeed(grid_seed, HashString(id));
}

GridResult RunGrid(const std::vector<ExperimentSpec>& specs, std::uint64_t grid_seed,
                   const GridOptions& options) {
  std::set<std::string> ids;
  for (const auto& s : specs)
    if (!ids.insert(s.id).second) throw ConfigError("duplicate experiment id '" + s.id + "'");

  GridResult result;
  fs::path rows_dir;
  if (!options.out_dir.empty()) {
    rows_dir = fs::path(options.out_dir) / "rows";
    fs::create_directories(rows_dir);
  }
  // Run in id order so logs and partial outputs do not depend on input order.
  std::vector<const ExperimentSpec*> order;
  for (const auto& s : specs) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const ExperimentSpec* a, const ExperimentSpec* b) { return a->id < b->id; });

  for (const ExperimentSpec* s : order) {
    const fs::path row_file = rows_dir.empty() ? fs::path() : rows_dir / (s->id + ".csv");
    if (options.resume && !row_file.empty() && fs::exists(row_file)) {
      try {
        auto rows = ParseCsvFile(row_file.string());
        if (rows.size() == 1 && rows[0].id == s->id) {
          result.rows.push_back(rows[0]);
          ++result.reused;
          if (options.log) options.log("[" + s->id + "] reused");
          continue;
        }
      } catch (const Error&) {
        // Unreadable row: recompute it.
      }
    }
    ExperimentSpec spec = *s;
    spec.seed = GridMemberSeed(grid_seed, spec.id);
    try {
      ResultRow row;
      if (options.runner) {
        row = options.runner(spec);
      } else {
        RunOptions ro;
        ro.log = options.log;
        if (options.save_artifacts && !options.out_dir.empty())
          ro.artifacts_dir = (fs::path(options.out_dir) / "runs").string();
        row = RunExperiment(spec, ro).row;
      }
      if (!row_file.empty()) EmitCsvFile({row}, row_file.string());
      result.rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      result.failures.push_back({spec.id, e.what()});
      if (options.log) options.log("[" + spec.id + "] failed: " + e.what());
    }
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.id < b.id; });
  if (!options.out_dir.empty() && !result.rows.empty())
    EmitCsvFile(result.rows, (fs::path(options.out_dir) / "results.csv").string());
  return result;
}

}  // namespace memlab
