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

#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"
#include "typecal/calibrator.h"
#include "typecal/dataset.h"
#include "typecal/evaluation.h"
#include "typecal/toy_scorer.h"

namespace typecal {
namespace {

using testing::ReadFile;
using testing::TempDir;
using testing::WriteFile;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result Run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// A small toy benchmark on disk.
struct ToyFiles {
  explicit ToyFiles(const std::string& name) : dir(TempDir(name)) {
    const Result r = Run({"make-toy", "--out", dir, "--train-size", "300", "--dev-size",
                          "40", "--test-size", "25"});
    REQUIRE(r.code == kExitOk);
  }
  std::vector<std::string> Common() const {
    return {"--vocab", dir + "/vocab.tsv", "--train", dir + "/train.jsonl",
            "--toy-bucket-slope", "1.5"};
  }
  std::vector<std::string> With(std::vector<std::string> head,
                                const std::vector<std::string>& tail) const {
    for (const auto& a : Common()) head.push_back(a);
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  }
  std::string dir;
};

TEST_CASE("usage errors exit with the input error code") {
  CHECK(Run({}).code == kExitInputError);
  CHECK(Run({"no-such-command"}).code == kExitInputError);
  CHECK(Run({"--help"}).code == kExitOk);
  CHECK(Run({"predict", "--bogus"}).code == kExitInputError);
  const Result missing = Run({"vocab-compile", "--vocab", "/nonexistent/v.tsv", "--out",
                              "/tmp/x"});
  CHECK(missing.code == kExitInputError);
  CHECK(missing.err.find("--vocab") != std::string::npos);
}

TEST_CASE("vocab-compile reports statistics and writes the trie") {
  const std::string dir = TempDir("cli_vocab");
  WriteFile(dir + "/v.tsv", "a\t0\nb\t0 1\nc\t2\n");
  WriteFile(dir + "/train.jsonl",
            R"({"id":"1","context":"a","mention":"a","gold_types":["a","b"]})"
            "\n"
            R"({"id":"2","context":"a","mention":"a","gold_types":["a","zzz"]})"
            "\n");
  const Result r = Run({"vocab-compile", "--vocab", dir + "/v.tsv", "--train",
                        dir + "/train.jsonl", "--out", dir + "/trie.bin"});
  REQUIRE(r.code == kExitOk);
  const auto stats = nlohmann::json::parse(r.out);
  CHECK(stats.at("num_types") == 3);
  CHECK(stats.at("token_alphabet_size") == 3);
  CHECK(stats.at("max_type_length") == 2);
  CHECK(stats.at("trie_nodes") == 4);  // Root, [0], [0 1] and [2].
  // Frequencies a=2, b=1, c=0 land in buckets 2, 1 and 0.
  CHECK(stats.at("bucket_histogram") == nlohmann::json::array({1, 1, 1}));
  CHECK(stats.at("unknown_types") == 1);
  CHECK(!ReadFile(dir + "/trie.bin").empty());

  WriteFile(dir + "/empty.tsv", "");
  CHECK(Run({"vocab-compile", "--vocab", dir + "/empty.tsv", "--out", dir + "/t"}).code ==
        kExitInputError);
  WriteFile(dir + "/bad.tsv", "a\t0\nb\tx\n");
  const Result bad = Run({"vocab-compile", "--vocab", dir + "/bad.tsv", "--out", dir + "/t"});
  CHECK(bad.code == kExitInputError);
  CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("vocab-compile handles a full-size vocabulary") {
  const std::string dir = TempDir("cli_big_vocab");
  std::mt19937_64 rng(1);
  const TypeVocabulary vocab = testing::RandomVocabulary(rng, 10331, 4000, 4);
  REQUIRE(vocab.size() == 10331);
  std::ostringstream text;
  WriteVocabulary(vocab, text);
  WriteFile(dir + "/v.tsv", text.str());
  const Result r = Run({"vocab-compile", "--vocab", dir + "/v.tsv", "--out",
                        dir + "/trie.bin", "--stats", dir + "/stats.json"});
  REQUIRE(r.code == kExitOk);
  const auto stats = nlohmann::json::parse(ReadFile(dir + "/stats.json"));
  CHECK(stats.at("num_types") == 10331);
  CHECK(stats.at("bucket_histogram") == nlohmann::json::array({10331}));
}

TEST_CASE("calibrate, predict and eval work together") {
  const ToyFiles toy("cli_pipeline");
  const std::string params = toy.dir + "/params.json";
  const Result cal = Run(toy.With({"calibrate"}, {"--dev", toy.dir + "/dev.jsonl",
                                                  "--params", params}));
  REQUIRE(cal.code == kExitOk);
  CHECK(cal.out.rfind("mode bucketed", 0) == 0);
  const CalibrationParams loaded = LoadParams(params);
  CHECK(loaded.mode == CalibrationMode::kBucketed);

  // The number of groups follows the bucket histogram of the training data.
  const Result stats = Run({"vocab-compile", "--vocab", toy.dir + "/vocab.tsv", "--train",
                            toy.dir + "/train.jsonl", "--out", toy.dir + "/trie.bin"});
  REQUIRE(stats.code == kExitOk);
  CHECK(nlohmann::json::parse(stats.out).at("bucket_histogram").size() ==
        loaded.n_groups());

  const Result none = Run(toy.With({"calibrate"}, {"--dev", toy.dir + "/dev.jsonl",
                                                   "--params", toy.dir + "/none.json",
                                                   "--mode", "none"}));
  REQUIRE(none.code == kExitOk);
  const CalibrationParams identity = LoadParams(toy.dir + "/none.json");
  CHECK(identity.weights.empty());
  CHECK(none.out.find("threshold") != std::string::npos);

  const Result over = Run(toy.With({"calibrate"}, {"--dev", toy.dir + "/dev.jsonl",
                                                   "--params", toy.dir + "/pt.json",
                                                   "--mode", "per-type",
                                                   "--per-type-budget", "10"}));
  CHECK(over.code == kExitInputError);
  CHECK(over.err.find("budget") != std::string::npos);

  const std::string preds = toy.dir + "/preds.jsonl";
  const Result pred = Run(toy.With({"predict"}, {"--test", toy.dir + "/test.jsonl",
                                                 "--params", params, "--with-candidates",
                                                 "--out", preds}));
  REQUIRE(pred.code == kExitOk);
  const auto lines = Lines(ReadFile(preds));
  CHECK(lines.size() == 25);
  for (const auto& line : lines) {
    const auto j = nlohmann::json::parse(line);
    double previous = 2.0;
    for (const auto& t : j.at("types")) {
      const double c = t.at("confidence").get<double>();
      CHECK(c >= loaded.threshold);
      CHECK(c <= previous);
      previous = c;
    }
    CHECK(j.at("candidates").size() >= j.at("types").size());
  }

  // In-process reference for the same run.
  const TypeVocabulary vocab = LoadVocabularyFile(toy.dir + "/vocab.tsv", std::nullopt);
  const PrefixTrie trie = PrefixTrie::Build(vocab);
  const FrequencyTable freq =
      BuildFrequencyTable(LoadExamplesFile(toy.dir + "/train.jsonl"), vocab).table;
  ToyScorer base(vocab, 13);
  BucketBiasScorer scorer(base, trie, freq,
                          LinearBucketOffsets(freq.num_groups(), 1.5, 5.0));
  const auto test = LoadExamplesFile(toy.dir + "/test.jsonl");
  const std::string expected = EvalReportJson(
      Evaluate(PredictAll(scorer, trie, vocab, loaded, freq, test, DecoderConfig{}), freq));

  const Result live = Run(toy.With({"eval"}, {"--test", toy.dir + "/test.jsonl",
                                              "--params", params, "--bins-csv",
                                              toy.dir + "/bins.csv"}));
  REQUIRE(live.code == kExitOk);
  CHECK(live.out == expected);
  CHECK(live.err.find("latency_ms mean=") != std::string::npos);
  CHECK(Lines(ReadFile(toy.dir + "/bins.csv")).size() == 31);

  const Result replay = Run({"eval", "--vocab", toy.dir + "/vocab.tsv", "--train",
                             toy.dir + "/train.jsonl", "--test", toy.dir + "/test.jsonl",
                             "--predictions", preds});
  REQUIRE(replay.code == kExitOk);
  CHECK(replay.out == expected);

  const Result plain = Run(toy.With({"predict"}, {"--test", toy.dir + "/test.jsonl",
                                                  "--params", params, "--out",
                                                  toy.dir + "/plain.jsonl"}));
  REQUIRE(plain.code == kExitOk);
  const Result needs_candidates =
      Run({"eval", "--vocab", toy.dir + "/vocab.tsv", "--test", toy.dir + "/test.jsonl",
           "--predictions", toy.dir + "/plain.jsonl"});
  CHECK(needs_candidates.code == kExitInputError);
}

TEST_CASE("eval of gold predictions is perfect") {
  const ToyFiles toy("cli_gold");
  const auto test = LoadExamplesFile(toy.dir + "/test.jsonl");
  std::ostringstream preds;
  for (const auto& ex : test) {
    nlohmann::ordered_json j;
    j["id"] = ex.id;
    j["types"] = nlohmann::ordered_json::array();
    for (const auto& t : ex.gold_types) j["types"].push_back({{"name", t}, {"confidence", 1.0}});
    j["candidates"] = j["types"];
    preds << j.dump() << "\n";
  }
  WriteFile(toy.dir + "/gold.jsonl", preds.str());
  const Result r = Run({"eval", "--vocab", toy.dir + "/vocab.tsv", "--test",
                        toy.dir + "/test.jsonl", "--predictions", toy.dir + "/gold.jsonl"});
  REQUIRE(r.code == kExitOk);
  const auto report = nlohmann::json::parse(r.out);
  CHECK(report.at("macro_f1") == 1.0);
  CHECK(report.at("ece") == 0.0);
}

TEST_CASE("predict edge cases") {
  const ToyFiles toy("cli_predict_edges");
  const std::string params = toy.dir + "/params.json";
  REQUIRE(Run(toy.With({"calibrate"}, {"--dev", toy.dir + "/dev.jsonl", "--params",
                                       params})).code == kExitOk);
  WriteFile(toy.dir + "/empty.jsonl", "");
  const Result empty =
      Run(toy.With({"predict"}, {"--test", toy.dir + "/empty.jsonl", "--params", params}));
  CHECK(empty.code == kExitOk);
  CHECK(empty.out.empty());

  const Result single = Run(toy.With(
      {"predict"}, {"--test", toy.dir + "/test.jsonl", "--params", params, "--single-label"}));
  REQUIRE(single.code == kExitOk);
  for (const auto& line : Lines(single.out)) {
    CHECK(nlohmann::json::parse(line).at("types").size() == 1);
  }

  const Result missing = Run(toy.With(
      {"predict"}, {"--test", toy.dir + "/test.jsonl", "--params", toy.dir + "/absent.json"}));
  CHECK(missing.code == kExitInputError);
  CHECK(missing.err.find("absent.json") != std::string::npos);

  const Result slope_without_train =
      Run({"predict", "--vocab", toy.dir + "/vocab.tsv", "--toy-bucket-slope", "1",
           "--test", toy.dir + "/test.jsonl", "--params", params});
  CHECK(slope_without_train.code == kExitInputError);
}

TEST_CASE("score-dump, fixture replay and scorer flags") {
  const ToyFiles toy("cli_dump");
  const Result dump = Run(toy.With(
      {"score-dump"}, {"--test", toy.dir + "/dev.jsonl", "--record-fixture",
                       toy.dir + "/fixture.jsonl", "--trace", toy.dir + "/trace.jsonl"}));
  REQUIRE(dump.code == kExitOk);
  const auto lines = Lines(dump.out);
  REQUIRE(lines.size() == 41);
  const auto header = nlohmann::json::parse(lines[0]);
  CHECK(header.at("beam_size") == 24);
  CHECK(header.at("normalize_include_eos") == true);
  CHECK(header.at("seed") == 13);
  CHECK(!Lines(ReadFile(toy.dir + "/trace.jsonl")).empty());

  // Replaying the recorded fixture reproduces every candidate line.
  const Result replay = Run({"score-dump", "--vocab", toy.dir + "/vocab.tsv", "--scorer",
                             "file:" + toy.dir + "/fixture.jsonl", "--test",
                             toy.dir + "/dev.jsonl"});
  REQUIRE(replay.code == kExitOk);
  const auto replayed = Lines(replay.out);
  REQUIRE(replayed.size() == lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(replayed[i] == lines[i]);

  const Result other = Run({"score-dump", "--vocab", toy.dir + "/vocab.tsv", "--scorer",
                            "file:" + toy.dir + "/fixture.jsonl", "--test",
                            toy.dir + "/test.jsonl"});
  CHECK(other.code == kExitInputError);

  const Result unreachable = Run({"score-dump", "--vocab", toy.dir + "/vocab.tsv",
                                  "--scorer", "remote:127.0.0.1:1", "--test",
                                  toy.dir + "/dev.jsonl"});
  CHECK(unreachable.code == kExitScorerUnavailable);
  CHECK(Run({"score-dump", "--vocab", toy.dir + "/vocab.tsv", "--scorer", "magic",
             "--test", toy.dir + "/dev.jsonl"}).code == kExitInputError);
}

TEST_CASE("identical runs are byte-identical") {
  const ToyFiles toy("cli_determinism");
  std::vector<std::string> outputs;
  for (int run = 0; run < 2; ++run) {
    const std::string p = toy.dir + "/params" + std::to_string(run) + ".json";
    const std::string preds = toy.dir + "/preds" + std::to_string(run) + ".jsonl";
    const std::string report = toy.dir + "/report" + std::to_string(run) + ".json";
    REQUIRE(Run(toy.With({"calibrate"}, {"--dev", toy.dir + "/dev.jsonl", "--params", p}))
                .code == kExitOk);
    REQUIRE(Run(toy.With({"predict"}, {"--test", toy.dir + "/test.jsonl", "--params", p,
                                       "--out", preds}))
                .code == kExitOk);
    REQUIRE(Run(toy.With({"eval"}, {"--test", toy.dir + "/test.jsonl", "--params", p,
                                    "--report", report}))
                .code == kExitOk);
    outputs.push_back(ReadFile(p) + ReadFile(preds) + ReadFile(report));
  }
  CHECK(outputs[0] == outputs[1]);
}

}  // namespace
}  // namespace typecal
