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

#ifndef TYPECAL_TOY_BENCHMARK_H_
#define TYPECAL_TOY_BENCHMARK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "typecal/dataset.h"
#include "typecal/type_vocab.h"

namespace typecal {

// Synthetic multi-label typing data for the toy scorer. Type names are
// pseudo-words spelled by their token syllables, so the toy scorer's
// evidence mechanism can read them out of a context. Popular ("head") types
// are mentioned often and mostly correctly; rare types are mentioned once
// when gold, while distractor mentions skew toward head types. Raw
// probabilities are therefore miscalibrated in opposite directions for the
// two ends of the frequency spectrum. The benchmark scorer adds a known
// per-bucket shift on top (see BucketBiasScorer).
struct ToyBenchmarkConfig {
  std::uint64_t seed = 7;
  std::int32_t alphabet_size = 48;
  int num_types = 96;
  int max_type_length = 3;
  int train_size = 1200;
  int dev_size = 400;
  int test_size = 800;
  double zipf_exponent = 1.1;
  int max_gold = 5;
  // Fraction of the types (by popularity rank) treated as head types.
  double head_fraction = 0.2;
  // Extra mentions beyond the first: Binomial(2, p).
  double head_gold_extra = 0.8;
  double tail_gold_extra = 0.1;
  double distractor_extra = 0.5;
  int max_distractors = 3;
  // Probability that a gold type is not mentioned at all.
  double gold_dropout = 0.1;
  // Eos-logit offsets of the benchmark scorer: slope * (bucket - pivot).
  // Rare types are pushed down and frequent types up.
  double bucket_bias_slope = 1.5;
  double bucket_bias_pivot = 5.0;
};

struct ToyBenchmark {
  TypeVocabulary vocab{0};
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
};

ToyBenchmark MakeToyBenchmark(const ToyBenchmarkConfig& config);

// Per-bucket offsets for a BucketBiasScorer over the benchmark's train
// frequencies.
std::vector<double> ToyBenchmarkOffsets(const ToyBenchmarkConfig& config,
                                        const FrequencyTable& freq);

// Writes vocab.tsv, train.jsonl, dev.jsonl and test.jsonl into `dir`.
void WriteToyBenchmark(const ToyBenchmark& benchmark, const std::string& dir);

}  // namespace typecal

#endif  // TYPECAL_TOY_BENCHMARK_H_
