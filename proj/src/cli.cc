// Copyright 2026 The typecal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "typecal/cli.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "typecal/calibrator.h"
#include "typecal/error.h"
#include "typecal/evaluation.h"
#include "typecal/file_scorer.h"
#include "typecal/remote_scorer.h"
#include "typecal/toy_benchmark.h"
#include "typecal/toy_scorer.h"

namespace typecal {
namespace {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
  std::string vocab;
  std::optional<std::int32_t> alphabet_size;
  std::string train;
  std::string dev;
  std::string test;
  std::string scorer = "toy";
  std::uint64_t seed = 13;
  double toy_bucket_slope = 0.0;
  double toy_bucket_pivot = 5.0;
  DecoderConfig decoder;
  bool strict_length_norm = false;
  FitConfig fit;
  std::string mode = "bucketed";
  std::size_t per_type_budget = 2'000'000;
  std::string params;
  bool single_label = false;
  std::string report;
  std::string out;
  std::string predictions;
  std::string bins_csv;
  std::string timing;
  std::string stats;
  std::string record_fixture;
  std::string trace;
  bool with_candidates = false;
  ToyBenchmarkConfig toy;
};

// Loaded inputs shared by the decoding commands.
struct Session {
  TypeVocabulary vocab{0};
  PrefixTrie trie;
  FrequencyTable freq;
  std::vector<std::string> unknown_types;
  std::unique_ptr<Scorer> base_scorer;
  // Either base_scorer itself or a BucketBiasScorer wrapping it.
  Scorer* scorer = nullptr;
  std::unique_ptr<Scorer> bias_wrapper;
};

void RequireFile(const std::string& path, const char* flag) {
  if (path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required");
  }
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIoError, std::string(flag) + " path does not exist: " + path);
  }
}

std::unique_ptr<Scorer> MakeScorer(const RunConfig& config,
                                   const TypeVocabulary& vocab) {
  const std::string& spec = config.scorer;
  if (spec == "toy") return MakeToyScorer(vocab, config.seed);
  if (spec == "uniform") {
    return std::make_unique<UniformScorer>(vocab.token_alphabet_size());
  }
  if (spec.rfind("file:", 0) == 0) {
    return LoadFileScorer(spec.substr(5), vocab.token_alphabet_size());
  }
  if (spec.rfind("remote:", 0) == 0) {
    return ConnectRemoteScorer(spec.substr(7), vocab.token_alphabet_size());
  }
  throw Error(ErrorCode::kInvalidArgument,
              "--scorer must be toy, uniform, file:PATH or remote:ADDR");
}

// Fills `s` in place; the bias wrapper keeps references into it.
void OpenSession(const RunConfig& config, bool need_scorer, Session& s) {
  RequireFile(config.vocab, "--vocab");
  s.vocab = LoadVocabularyFile(config.vocab, config.alphabet_size);
  if (s.vocab.empty()) {
    throw Error(ErrorCode::kEmptyVocabulary, "vocabulary " + config.vocab + " is empty");
  }
  s.trie = PrefixTrie::Build(s.vocab);
  if (!config.train.empty()) {
    RequireFile(config.train, "--train");
    auto built = BuildFrequencyTable(LoadExamplesFile(config.train), s.vocab);
    s.freq = std::move(built.table);
    s.unknown_types = std::move(built.unknown_types);
  } else {
    s.freq = FrequencyTable(std::vector<std::int64_t>(s.vocab.size(), 0));
  }
  if (!need_scorer) return;
  s.base_scorer = MakeScorer(config, s.vocab);
  s.scorer = s.base_scorer.get();
  if (config.toy_bucket_slope != 0.0) {
    if (config.scorer != "toy") {
      throw Error(ErrorCode::kInvalidArgument,
                  "--toy-bucket-slope requires --scorer toy");
    }
    if (config.train.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--toy-bucket-slope requires --train for type frequencies");
    }
    s.bias_wrapper = std::make_unique<BucketBiasScorer>(
        *s.base_scorer, s.trie, s.freq,
        LinearBucketOffsets(std::max(s.freq.num_groups(), 1),
                            config.toy_bucket_slope, config.toy_bucket_pivot));
    s.scorer = s.bias_wrapper.get();
  }
}

DecoderConfig Decoder(const RunConfig& config) {
  DecoderConfig d = config.decoder;
  d.normalize_include_eos = !config.strict_length_norm;
  return d;
}

// Writes to `path`, or to `fallback` when path is empty.
void Emit(const std::string& path, const std::string& content, std::ostream& fallback) {
  if (path.empty()) {
    fallback << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << content;
}

ordered_json CandidateJson(const TypeVocabulary& vocab, const ScoredCandidate& c,
                           bool with_scores) {
  ordered_json j;
  j["name"] = vocab.entry(c.type_id).name;
  j["confidence"] = c.confidence.value();
  if (with_scores) {
    j["mean_logprob"] = c.mean_logprob;
    j["bias_logprob"] = c.bias_logprob;
  }
  return j;
}

std::string PredictionLine(const TypeVocabulary& vocab, const std::string& id,
                           const PredictedExample& p, bool with_candidates) {
  ordered_json j;
  j["id"] = id;
  j["types"] = ordered_json::array();
  for (const ScoredCandidate& c : p.kept) {
    j["types"].push_back(CandidateJson(vocab, c, false));
  }
  if (with_candidates) {
    j["candidates"] = ordered_json::array();
    for (const ScoredCandidate& c : p.candidates) {
      j["candidates"].push_back(CandidateJson(vocab, c, true));
    }
  }
  return j.dump() + "\n";
}

// Inverse of PredictionLine for files written with candidates.
std::vector<PredictedExample> LoadPredictions(const std::string& path,
                                              const std::vector<Example>& gold,
                                              const TypeVocabulary& vocab) {
  RequireFile(path, "--predictions");
  std::ifstream in(path);
  std::map<std::string, PredictedExample> by_id;
  std::string line;
  std::size_t line_no = 0;
  const auto parse_list = [&](const nlohmann::json& list) {
    std::vector<ScoredCandidate> out;
    for (const auto& item : list) {
      const auto name = item.at("name").get<std::string>();
      const auto id = vocab.Find(name);
      if (!id) throw Error(ErrorCode::kFormatError, "unknown type " + name);
      ScoredCandidate c;
      c.type_id = *id;
      c.confidence = item.at("confidence").get<double>();
      c.mean_logprob = item.value("mean_logprob", 0.0);
      c.bias_logprob = item.value("bias_logprob", 0.0);
      out.push_back(c);
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.contains("candidates")) {
        throw Error(ErrorCode::kFormatError,
                    "predictions need candidates (predict --with-candidates)");
      }
      PredictedExample p;
      p.kept = parse_list(j.at("types"));
      p.candidates = parse_list(j.at("candidates"));
      by_id[j.at("id").get<std::string>()] = std::move(p);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError,
                  "predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::vector<PredictedExample> out;
  for (const Example& ex : gold) {
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kFormatError, "no prediction for example " + ex.id);
    }
    it->second.gold = ResolveGold(ex, vocab);
    out.push_back(std::move(it->second));
  }
  return out;
}

const char* StatusName(GroupSummary::Status status) {
  switch (status) {
    case GroupSummary::Status::kFitted: return "fitted";
    case GroupSummary::Status::kInherited: return "inherited";
    case GroupSummary::Status::kGlobal: return "global";
    case GroupSummary::Status::kUnused: return "unused";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Commands

int CmdVocabCompile(const RunConfig& config, std::ostream& out) {
  Session s;
  OpenSession(config, false, s);
  if (config.out.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--out is required");
  }
  {
    std::ofstream trie_out(config.out, std::ios::binary);
    if (!trie_out) throw Error(ErrorCode::kIoError, "cannot write " + config.out);
    s.trie.Save(trie_out);
  }
  std::vector<std::int64_t> histogram(s.freq.num_groups(), 0);
  for (const TypeEntry& e : s.vocab.entries()) ++histogram[s.freq.bucket(e.id)];
  ordered_json stats;
  stats["num_types"] = s.vocab.size();
  stats["token_alphabet_size"] = s.vocab.token_alphabet_size();
  stats["max_type_length"] = s.vocab.max_type_length();
  stats["trie_nodes"] = s.trie.num_nodes();
  stats["bucket_histogram"] = histogram;
  stats["unknown_types"] = s.unknown_types.size();
  Emit(config.stats, stats.dump(2) + "\n", out);
  return kExitOk;
}

int CmdCalibrate(const RunConfig& config, std::ostream& out) {
  RequireFile(config.dev, "--dev");
  if (config.params.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--params is required");
  }
  Session s;
  OpenSession(config, true, s);
  const std::vector<Example> dev = LoadExamplesFile(config.dev);
  CalibrationConfig cc;
  cc.mode = ParseMode(config.mode);
  cc.decoder = Decoder(config);
  cc.fit = config.fit;
  cc.per_type_budget = config.per_type_budget;
  const CalibrationRun run = FitCalibration(*s.scorer, s.trie, s.vocab, s.freq, dev, cc);
  SaveParams(run.params, config.params);

  out << "mode " << ModeName(run.params.mode) << ", " << run.params.n_groups()
      << " groups, " << run.params.num_weight_parameters() << " weights\n";
  out << std::setprecision(6);
  for (std::size_t g = 0; g < run.groups.size(); ++g) {
    const GroupSummary& summary = run.groups[g];
    const CalibrationWeights& w = run.params.weights[g];
    out << "group " << g << ": points=" << summary.points
        << " positives=" << summary.positives << " " << StatusName(summary.status);
    if (summary.inherited_from >= 0) out << "(" << summary.inherited_from << ")";
    out << " w1=" << w.w1 << " w2=" << w.w2 << " b=" << w.b << "\n";
  }
  out << "threshold " << run.params.threshold << " dev_f1 " << run.dev_f1 << "\n";
  return kExitOk;
}

std::vector<Example> InputExamples(const RunConfig& config) {
  RequireFile(config.test, "--test");
  return LoadExamplesFile(config.test);
}

int CmdPredict(const RunConfig& config, std::ostream& out) {
  const CalibrationParams params = LoadParams(config.params);
  Session s;
  OpenSession(config, true, s);
  const std::vector<Example> examples = InputExamples(config);
  std::ostringstream lines;
  for (const Example& ex : examples) {
    const auto predicted =
        PredictAll(*s.scorer, s.trie, s.vocab, params, s.freq, {ex},
                   Decoder(config), config.single_label);
    lines << PredictionLine(s.vocab, ex.id, predicted.front(), config.with_candidates);
  }
  Emit(config.out, lines.str(), out);
  return kExitOk;
}

int CmdEval(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Session s;
  OpenSession(config, config.predictions.empty(), s);
  const std::vector<Example> examples = InputExamples(config);
  std::vector<PredictedExample> predicted;
  std::vector<double> latency_ms;
  if (!config.predictions.empty()) {
    predicted = LoadPredictions(config.predictions, examples, s.vocab);
  } else {
    const CalibrationParams params = LoadParams(config.params);
    for (const Example& ex : examples) {
      const auto start = std::chrono::steady_clock::now();
      auto one = PredictAll(*s.scorer, s.trie, s.vocab, params, s.freq, {ex},
                            Decoder(config), config.single_label);
      const auto stop = std::chrono::steady_clock::now();
      latency_ms.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
      predicted.push_back(std::move(one.front()));
    }
  }
  EvaluationOptions options;
  options.single_label = config.single_label;
  const EvalReport report = Evaluate(predicted, s.freq, options);
  Emit(config.report, EvalReportJson(report), out);
  if (!config.bins_csv.empty()) {
    std::ostringstream csv;
    WriteBinsCsv(report, csv);
    Emit(config.bins_csv, csv.str(), out);
  }
  if (report.n_excluded > 0) {
    err << "warning: " << report.n_excluded
        << " examples with empty gold sets excluded\n";
  }
  if (!latency_ms.empty()) {
    double mean = 0.0;
    for (double v : latency_ms) mean += v;
    mean /= static_cast<double>(latency_ms.size());
    double var = 0.0;
    for (double v : latency_ms) var += (v - mean) * (v - mean);
    const double stdev =
        latency_ms.size() > 1 ? std::sqrt(var / static_cast<double>(latency_ms.size() - 1))
                              : 0.0;
    err << "latency_ms mean=" << mean << " stdev=" << stdev
        << " n=" << latency_ms.size() << "\n";
    if (!config.timing.empty()) {
      ordered_json t;
      t["examples"] = latency_ms.size();
      t["mean_ms"] = mean;
      t["stdev_ms"] = stdev;
      Emit(config.timing, t.dump(2) + "\n", out);
    }
  }
  return kExitOk;
}

int CmdScoreDump(const RunConfig& config, std::ostream& out) {
  Session s;
  OpenSession(config, true, s);
  const std::vector<Example> examples = InputExamples(config);
  RecordingScorer recorder(*s.scorer);
  const DecoderConfig decoder = Decoder(config);
  std::ostringstream lines;
  ordered_json header;
  header["beam_size"] = decoder.beam_size;
  header["max_steps"] = decoder.ResolvedMaxSteps(s.vocab);
  header["normalize_include_eos"] = decoder.normalize_include_eos;
  header["scorer"] = config.scorer;
  header["seed"] = config.seed;
  lines << header.dump() << "\n";
  for (const Example& ex : examples) {
    const auto candidates = BeamSearch(recorder, s.trie, s.vocab,
                                       ScorerContext::FromExample(ex), decoder);
    ordered_json j;
    j["id"] = ex.id;
    j["candidates"] = ordered_json::array();
    for (const ScoredCandidate& c : candidates) {
      j["candidates"].push_back({{"name", s.vocab.entry(c.type_id).name},
                                 {"type_id", c.type_id},
                                 {"mean_logprob", c.mean_logprob},
                                 {"bias_logprob", c.bias_logprob}});
    }
    lines << j.dump() << "\n";
  }
  Emit(config.out, lines.str(), out);
  if (!config.record_fixture.empty()) {
    std::ostringstream fixture;
    recorder.WriteFixture(fixture);
    Emit(config.record_fixture, fixture.str(), out);
  }
  if (!config.trace.empty()) {
    std::ostringstream trace;
    recorder.WriteTrace(trace);
    Emit(config.trace, trace.str(), out);
  }
  return kExitOk;
}

int CmdMakeToy(const RunConfig& config, std::ostream& out) {
  if (config.out.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--out directory is required");
  }
  const ToyBenchmark benchmark = MakeToyBenchmark(config.toy);
  WriteToyBenchmark(benchmark, config.out);
  out << "wrote " << benchmark.vocab.size() << " types, " << benchmark.train.size()
      << "/" << benchmark.dev.size() << "/" << benchmark.test.size()
      << " train/dev/test examples to " << config.out << "\n"
      << "benchmark scorer: --scorer toy --toy-bucket-slope "
      << config.toy.bucket_bias_slope << " --toy-bucket-pivot "
      << config.toy.bucket_bias_pivot << "\n";
  return kExitOk;
}

void AddInputs(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--vocab", c.vocab, "Vocabulary file (name<TAB>token ids)");
  cmd->add_option("--alphabet-size", c.alphabet_size,
                  "Token alphabet size (default: max token id + 1)");
  cmd->add_option("--train", c.train, "Training examples (type frequencies)");
}

void AddDecoding(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--scorer", c.scorer, "toy | uniform | file:PATH | remote:HOST:PORT")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Seed of the toy scorer")->capture_default_str();
  cmd->add_option("--toy-bucket-slope", c.toy_bucket_slope,
                  "Toy scorer eos-logit shift per frequency bucket (0: off)")
      ->capture_default_str();
  cmd->add_option("--toy-bucket-pivot", c.toy_bucket_pivot,
                  "Bucket whose toy shift is zero")
      ->capture_default_str();
  cmd->add_option("--beam-size", c.decoder.beam_size, "Beam size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-steps", c.decoder.max_steps,
                  "Decoding steps (0: longest type + 1)");
  cmd->add_flag("--strict-length-norm", c.strict_length_norm,
                "Average over type tokens only, excluding the eos step");
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  RunConfig c;
  CLI::App app{"Calibrated constrained decoding for multi-label typing", "typecal"};
  app.require_subcommand(1);

  auto* vocab = app.add_subcommand("vocab-compile", "Validate a vocabulary and cache its trie");
  AddInputs(vocab, c);
  vocab->add_option("--out", c.out, "Trie cache output path");
  vocab->add_option("--stats", c.stats, "Stats JSON path (default: stdout)");

  auto* calibrate = app.add_subcommand("calibrate", "Fit calibration parameters on dev");
  AddInputs(calibrate, c);
  AddDecoding(calibrate, c);
  calibrate->add_option("--dev", c.dev, "Dev examples");
  calibrate->add_option("--mode", c.mode, "bucketed | per-type | shared | no-bias | none")
      ->capture_default_str();
  calibrate->add_option("--params", c.params, "Output parameter file");
  calibrate->add_option("--l2", c.fit.l2_lambda, "L2 strength on w1, w2")
      ->capture_default_str();
  calibrate->add_option("--min-points", c.fit.min_points_per_bucket,
                        "Minimum points per fitted group")
      ->capture_default_str();
  calibrate->add_option("--per-type-budget", c.per_type_budget,
                        "Max types x dev examples in per-type mode")
      ->capture_default_str();

  auto* predict = app.add_subcommand("predict", "Predict calibrated type sets");
  AddInputs(predict, c);
  AddDecoding(predict, c);
  predict->add_option("--test", c.test, "Input examples");
  predict->add_option("--params", c.params, "Parameter file");
  predict->add_flag("--single-label", c.single_label, "Return the single best type");
  predict->add_flag("--with-candidates", c.with_candidates,
                    "Include every beam candidate with its scores");
  predict->add_option("--out", c.out, "Output JSONL (default: stdout)");

  auto* eval = app.add_subcommand("eval", "Evaluate predictions against gold types");
  AddInputs(eval, c);
  AddDecoding(eval, c);
  eval->add_option("--test", c.test, "Gold examples");
  eval->add_option("--params", c.params, "Parameter file");
  eval->add_option("--predictions", c.predictions,
                   "Evaluate a predict --with-candidates file instead of decoding");
  eval->add_flag("--single-label", c.single_label, "Single-label evaluation");
  eval->add_option("--report", c.report, "Report JSON (default: stdout)");
  eval->add_option("--bins-csv", c.bins_csv, "Reliability bins CSV");
  eval->add_option("--timing", c.timing, "Latency summary JSON");

  auto* dump = app.add_subcommand("score-dump", "Dump raw beam candidates");
  AddInputs(dump, c);
  AddDecoding(dump, c);
  dump->add_option("--test", c.test, "Input examples");
  dump->add_option("--out", c.out, "Output JSONL (default: stdout)");
  dump->add_option("--record-fixture", c.record_fixture,
                   "Write every scorer query as a file-scorer fixture");
  dump->add_option("--trace", c.trace, "Write the (ctx, prefix) query trace");

  auto* toy = app.add_subcommand("make-toy", "Write the synthetic toy benchmark");
  toy->add_option("--out", c.out, "Output directory");
  toy->add_option("--seed", c.toy.seed, "Generator seed")->capture_default_str();
  toy->add_option("--train-size", c.toy.train_size)->capture_default_str();
  toy->add_option("--dev-size", c.toy.dev_size)->capture_default_str();
  toy->add_option("--test-size", c.toy.test_size)->capture_default_str();
  toy->add_option("--bucket-slope", c.toy.bucket_bias_slope)->capture_default_str();
  toy->add_option("--bucket-pivot", c.toy.bucket_bias_pivot)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (vocab->parsed()) return CmdVocabCompile(c, out);
    if (calibrate->parsed()) return CmdCalibrate(c, out);
    if (predict->parsed()) return CmdPredict(c, out);
    if (eval->parsed()) return CmdEval(c, out, err);
    if (dump->parsed()) return CmdScoreDump(c, out);
    if (toy->parsed()) return CmdMakeToy(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kScorerUnavailable ? kExitScorerUnavailable
                                                     : kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace typecal
