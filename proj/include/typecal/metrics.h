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

#ifndef TYPECAL_METRICS_H_
#define TYPECAL_METRICS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "typecal/type_vocab.h"

namespace typecal {

inline constexpr int kDefaultCalibrationBins = 10;
inline constexpr std::int64_t kDefaultRareCutoff = 10;

// Per-example counts for macro-averaged precision/recall.
struct PrfCounts {
  std::int64_t true_positive = 0;
  std::int64_t predicted = 0;
  std::int64_t gold = 0;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Examples dropped because their gold set was empty.
  std::size_t excluded = 0;
};

// Entity-typing macro convention: precision is averaged over examples that
// predict at least one type, recall over all examples, F1 is their harmonic
// mean (0 when both are 0). Examples with an empty gold set are excluded.
// Throws kEmptyEvaluation when nothing remains.
Prf MacroPrfFromCounts(std::span<const PrfCounts> counts);

struct LabelSets {
  std::vector<TypeId> gold;
  std::vector<TypeId> predicted;
};

PrfCounts CountMatches(const LabelSets& sets);
Prf MacroPrf(std::span<const LabelSets> examples);

struct ScoredOutcome {
  double confidence = 0.0;  // In [0, 1].
  bool correct = false;
};

struct BinStats {
  int bin_index = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::int64_t count = 0;
  double mean_confidence = 0.0;     // 0 for empty bins.
  double empirical_accuracy = 0.0;  // 0 for empty bins.
};

// Equal-width bins over [0, 1]; a confidence of exactly 1 lands in the last
// bin.
std::vector<BinStats> BinOutcomes(std::span<const ScoredOutcome> scored,
                                  int bins = kDefaultCalibrationBins);

// Sum over bins of (n_b / N) * |accuracy_b - confidence_b|.
double Ece(std::span<const ScoredOutcome> scored,
           int bins = kDefaultCalibrationBins);

// Sum over non-empty bins of |accuracy_b - confidence_b|.
double Tce(std::span<const ScoredOutcome> scored,
           int bins = kDefaultCalibrationBins);

inline constexpr char kTceDefinition[] =
    "unweighted sum over non-empty equal-width bins of "
    "|accuracy - mean confidence|";

struct FrequencyScoredOutcome {
  double confidence = 0.0;
  bool correct = false;
  std::int64_t frequency = 0;
};

struct ReliabilityTables {
  std::vector<BinStats> rare;      // frequency < rare_cutoff
  std::vector<BinStats> frequent;  // frequency >= rare_cutoff
};

ReliabilityTables Reliability(std::span<const FrequencyScoredOutcome> scored,
                              int bins = kDefaultCalibrationBins,
                              std::int64_t rare_cutoff = kDefaultRareCutoff);

struct EvalReport {
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f1 = 0.0;
  std::optional<double> accuracy;
  double ece = 0.0;
  double tce = 0.0;
  std::size_t n_examples = 0;
  std::size_t n_scored = 0;
  std::size_t n_excluded = 0;
  int bins = kDefaultCalibrationBins;
  std::int64_t rare_cutoff = kDefaultRareCutoff;
  std::vector<BinStats> all_bins;
  ReliabilityTables reliability;
};

// Stable key order; numbers use shortest round-trip formatting.
std::string EvalReportJson(const EvalReport& report);
void WriteBinsCsv(const EvalReport& report, std::ostream& out);

}  // namespace typecal

#endif  // TYPECAL_METRICS_H_
