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

#include "typecal/toy_benchmark.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "typecal/error.h"
#include "typecal/toy_scorer.h"

namespace typecal {
namespace {

// mt19937_64 is fully specified; the draws below avoid the
// implementation-defined standard distributions so data is identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  int Below(int n) { return static_cast<int>(Uniform() * n); }
  bool Bernoulli(double p) { return Uniform() < p; }
  int Binomial(int n, double p) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += Bernoulli(p) ? 1 : 0;
    return k;
  }
  // Index drawn proportionally to weights (restricted to !taken).
  int Weighted(const std::vector<double>& weights, const std::vector<bool>& taken) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!taken[i]) total += weights[i];
    }
    double r = Uniform() * total;
    int last = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (taken[i]) continue;
      last = static_cast<int>(i);
      if (r < weights[i]) return last;
      r -= weights[i];
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

constexpr char kConsonants[] = "bdfgklmnprstvz";
constexpr char kVowels[] = "aeiou";

std::string Syllable(TokenId token) {
  const int nc = sizeof(kConsonants) - 1;
  const int nv = sizeof(kVowels) - 1;
  std::string s;
  s += kConsonants[token % nc];
  s += kVowels[(token / nc) % nv];
  if (token >= nc * nv) s += std::to_string(token / (nc * nv));
  return s;
}

const std::vector<std::string>& FillerWords() {
  static const std::vector<std::string> words = {
      "the",    "report",  "said",   "after",   "during", "several",
      "people", "visited", "near",   "city",    "while",  "officials",
      "noted",  "recent",  "event",  "with",    "large",  "crowd",
      "which",  "became",  "known",  "across",  "region", "today"};
  return words;
}

std::string MentionWord(Rng& rng) {
  static const std::string letters = "ABCDEFGHJKLMNPRSTVWXYZ";
  std::string word;
  word += letters[rng.Below(static_cast<int>(letters.size()))];
  for (int i = 0; i < 4; ++i) word += static_cast<char>('a' + rng.Below(26));
  return word;
}

struct Generator {
  const ToyBenchmarkConfig& config;
  const TypeVocabulary& vocab;
  std::vector<double> popularity;
  std::vector<bool> head;
  Rng rng;

  Example Make(const std::string& id) {
    const int n = static_cast<int>(vocab.size());
    std::vector<bool> taken(n, false);
    Example ex;
    ex.id = id;
    const int n_gold = 1 + rng.Below(std::min(config.max_gold, n));
    std::vector<std::pair<TypeId, int>> mentions;
    for (int g = 0; g < n_gold; ++g) {
      const int t = rng.Weighted(popularity, taken);
      taken[t] = true;
      ex.gold_types.push_back(vocab.entry(t).name);
      if (rng.Bernoulli(config.gold_dropout)) continue;
      const double extra = head[t] ? config.head_gold_extra : config.tail_gold_extra;
      mentions.emplace_back(t, 1 + rng.Binomial(2, extra));
    }
    const int n_distractors = rng.Below(config.max_distractors + 1);
    for (int d = 0; d < n_distractors && d + n_gold < n; ++d) {
      const int t = rng.Weighted(popularity, taken);
      taken[t] = true;
      mentions.emplace_back(t, 1 + rng.Binomial(2, config.distractor_extra));
    }

    std::vector<std::string> words;
    const auto& filler = FillerWords();
    const auto add_filler = [&](int count) {
      for (int i = 0; i < count; ++i) {
        words.push_back(filler[rng.Below(static_cast<int>(filler.size()))]);
      }
    };
    add_filler(2 + rng.Below(4));
    ex.mention = MentionWord(rng);
    words.push_back(std::string(kMentionOpen) + " " + ex.mention + " " +
                    kMentionClose);
    for (const auto& [type, count] : mentions) {
      for (int c = 0; c < count; ++c) {
        add_filler(1 + rng.Below(2));
        words.push_back(vocab.entry(type).name);
      }
    }
    add_filler(1 + rng.Below(3));
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) ex.context += ' ';
      ex.context += words[i];
    }
    ex.context += " .";
    return ex;
  }
};

TypeVocabulary MakeVocabulary(const ToyBenchmarkConfig& config, Rng& rng) {
  std::set<std::vector<TokenId>> seen;
  std::vector<std::pair<std::string, std::vector<TokenId>>> entries;
  int attempts = 0;
  while (static_cast<int>(entries.size()) < config.num_types) {
    if (++attempts > config.num_types * 1000) {
      throw Error(ErrorCode::kInvalidConfig,
                  "alphabet too small for the requested number of types");
    }
    const int length = 1 + rng.Below(config.max_type_length);
    std::vector<TokenId> tokens;
    for (int i = 0; i < length; ++i) tokens.push_back(rng.Below(config.alphabet_size));
    if (!seen.insert(tokens).second) continue;
    std::string name;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) name += '_';
      name += Syllable(tokens[i]);
    }
    entries.emplace_back(std::move(name), std::move(tokens));
  }
  return TypeVocabulary::FromEntries(std::move(entries), config.alphabet_size);
}

}  // namespace

ToyBenchmark MakeToyBenchmark(const ToyBenchmarkConfig& config) {
  if (config.num_types < 1 || config.alphabet_size < 1 ||
      config.max_type_length < 1 || config.max_gold < 1) {
    throw Error(ErrorCode::kInvalidConfig, "toy benchmark sizes must be positive");
  }
  Rng rng(config.seed);
  ToyBenchmark benchmark;
  benchmark.vocab = MakeVocabulary(config, rng);

  const int n = config.num_types;
  std::vector<int> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(rank[i], rank[rng.Below(i + 1)]);

  Generator gen{config, benchmark.vocab, std::vector<double>(n),
                std::vector<bool>(n), Rng(config.seed ^ 0x5eedULL)};
  const int head_count =
      std::max(1, static_cast<int>(std::lround(config.head_fraction * n)));
  for (int t = 0; t < n; ++t) {
    gen.popularity[t] = std::pow(rank[t] + 1.0, -config.zipf_exponent);
    gen.head[t] = rank[t] < head_count;
  }

  const auto make_split = [&](const std::string& prefix, int size) {
    std::vector<Example> split;
    split.reserve(size);
    for (int i = 0; i < size; ++i) {
      split.push_back(gen.Make(prefix + "-" + std::to_string(i)));
    }
    return split;
  };
  benchmark.train = make_split("train", config.train_size);
  benchmark.dev = make_split("dev", config.dev_size);
  benchmark.test = make_split("test", config.test_size);
  return benchmark;
}

void WriteToyBenchmark(const ToyBenchmark& benchmark, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + dir + "/" + name);
    return out;
  };
  auto vocab = open("vocab.tsv");
  WriteVocabulary(benchmark.vocab, vocab);
  auto train = open("train.jsonl");
  WriteExamples(benchmark.train, train);
  auto dev = open("dev.jsonl");
  WriteExamples(benchmark.dev, dev);
  auto test = open("test.jsonl");
  WriteExamples(benchmark.test, test);
}

std::vector<double> ToyBenchmarkOffsets(const ToyBenchmarkConfig& config,
                                        const FrequencyTable& freq) {
  return LinearBucketOffsets(std::max(freq.num_groups(), 1),
                             config.bucket_bias_slope, config.bucket_bias_pivot);
}

}  // namespace typecal
