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

#ifndef TYPECAL_CALIBRATOR_H_
#define TYPECAL_CALIBRATOR_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "typecal/dataset.h"
#include "typecal/decoder.h"
#include "typecal/scorer.h"
#include "typecal/type_vocab.h"

namespace typecal {

// kBucketed: one (w1, w2, b) per frequency bucket.
// kPerType:  one triple per type, fit on every (example, type) pair.
// kShared:   a single triple for all types.
// kNoBias:   bucketed with w2 fixed at 0.
// kNone:     confidence = exp(mean_logprob).
enum class CalibrationMode { kBucketed, kPerType, kShared, kNoBias, kNone };

std::string_view ModeName(CalibrationMode mode);
// Accepts the canonical names and their dashed spellings ("per-type").
CalibrationMode ParseMode(std::string_view name);

struct CalibrationWeights {
  double w1 = 0.0;  // On log p(t | e).
  double w2 = 0.0;  // On log p(t | empty input).
  double b = 0.0;

  bool operator==(const CalibrationWeights&) const = default;
};

struct FitConfig {
  double l2_lambda = 1e-3;
  int max_iters = 200;
  double tol = 1e-8;
  int min_points_per_bucket = 8;
  int min_positive_per_bucket = 1;

  bool operator==(const FitConfig&) const = default;
};

struct CalibrationParams {
  CalibrationMode mode = CalibrationMode::kBucketed;
  // One entry per group: bucket index, or type id in kPerType mode. Empty in
  // kNone mode.
  std::vector<CalibrationWeights> weights;
  double threshold = 0.5;
  bool normalize_include_eos = true;
  FitConfig fit_config;

  int n_groups() const { return static_cast<int>(weights.size()); }
  std::size_t num_weight_parameters() const { return 3 * weights.size(); }
  bool operator==(const CalibrationParams&) const = default;
};

// Versioned JSON parameter file.
std::string ParamsToJson(const CalibrationParams& params);
CalibrationParams ParamsFromJson(const std::string& text);
void SaveParams(const CalibrationParams& params, const std::string& path);
// Throws kMissingParams when the file does not exist.
CalibrationParams LoadParams(const std::string& path);

struct CalibrationPoint {
  double x1 = 0.0;  // mean_logprob
  double x2 = 0.0;  // bias_logprob
  int y = -1;       // +1 if the type is gold, else -1.
  int bucket = 0;
};

using CalibrationData = std::vector<std::vector<CalibrationPoint>>;

// Decoded dev set, kept so threshold search does not decode twice.
struct DecodedSet {
  std::vector<std::vector<ScoredCandidate>> candidates;
  // Gold ids per example; names missing from the vocabulary get distinct
  // negative ids so they count toward recall but never match.
  std::vector<std::vector<TypeId>> gold;
};

std::vector<TypeId> ResolveGold(const Example& example,
                                const TypeVocabulary& vocab);

DecodedSet DecodeExamples(Scorer& scorer, const PrefixTrie& trie,
                          const TypeVocabulary& vocab,
                          const std::vector<Example>& examples,
                          const DecoderConfig& config);

// Labels every beam candidate of every dev example and files it under its
// group. `group_of` maps a type id to a group index < n_groups.
CalibrationData LabelCandidates(const DecodedSet& decoded, int n_groups,
                                const std::function<int(TypeId)>& group_of);

// Beam-search candidates of each dev example, labeled and grouped by
// frequency bucket. Requires n_groups >= freq.num_groups().
CalibrationData CollectCalibrationData(Scorer& scorer, const PrefixTrie& trie,
                                       const TypeVocabulary& vocab,
                                       const FrequencyTable& freq,
                                       const std::vector<Example>& dev,
                                       const DecoderConfig& config,
                                       int n_groups,
                                       DecodedSet* decoded = nullptr);

// Minimizer of summed binary cross-entropy of sigmoid(w1 x1 + w2 x2 + b)
// plus l2/2 (w1^2 + w2^2). With use_bias_feature false, w2 stays 0.
// Throws kDegenerateBucket when the points fail the min-points or
// min-positives checks or contain no negative.
CalibrationWeights FitLogisticRegression(std::span<const CalibrationPoint> points,
                                         const FitConfig& fit,
                                         bool use_bias_feature = true);

// The group a candidate's weights come from. Bucketed modes clamp buckets
// beyond the fitted range to the last group.
int GroupOf(const CalibrationParams& params, TypeId type,
            const FrequencyTable& freq);

double Calibrate(const CalibrationParams& params, const ScoredCandidate& cand,
                 const FrequencyTable& freq);

// Grid = distinct candidate confidences plus {0, 1}. A candidate is kept
// when confidence >= threshold. Returns the grid point with the largest
// macro F1, preferring the larger threshold on ties. Candidates must carry
// confidences.
double SelectThreshold(const std::vector<std::vector<ScoredCandidate>>& dev,
                       const std::vector<std::vector<TypeId>>& gold);

// Macro F1 of thresholding `dev` at `threshold`.
double ThresholdF1(const std::vector<std::vector<ScoredCandidate>>& dev,
                   const std::vector<std::vector<TypeId>>& gold,
                   double threshold);
std::vector<double> ThresholdGrid(
    const std::vector<std::vector<ScoredCandidate>>& dev);

struct GroupSummary {
  enum class Status { kFitted, kInherited, kGlobal, kUnused };
  std::size_t points = 0;
  std::size_t positives = 0;
  Status status = Status::kUnused;
  int inherited_from = -1;
};

struct CalibrationRun {
  CalibrationParams params;
  std::vector<GroupSummary> groups;
  double dev_f1 = 0.0;
  // Dev candidates with calibrated confidences filled in.
  DecodedSet dev;
};

struct CalibrationConfig {
  CalibrationMode mode = CalibrationMode::kBucketed;
  DecoderConfig decoder;
  FitConfig fit;
  // kPerType guard on |types| * |dev| scored pairs.
  std::size_t per_type_budget = 2'000'000;
};

// Estimates parameters on dev for any mode, then selects the threshold on
// the dev beam candidates. Throws kEmptyDevSet on an empty dev set.
CalibrationRun FitCalibration(Scorer& scorer, const PrefixTrie& trie,
                              const TypeVocabulary& vocab,
                              const FrequencyTable& freq,
                              const std::vector<Example>& dev,
                              const CalibrationConfig& config);

// Frequency-bucketed fit (also kShared and kNoBias): 3 * n_groups weights.
CalibrationParams FitBucketed(Scorer& scorer, const PrefixTrie& trie,
                              const TypeVocabulary& vocab,
                              const FrequencyTable& freq,
                              const std::vector<Example>& dev,
                              const CalibrationConfig& config);

// One triple per type from every (example, type) pair; 3 * |types| weights.
// Throws kBudgetExceeded when |types| * |dev| > budget.
CalibrationParams FitFullPerType(Scorer& scorer, const PrefixTrie& trie,
                                 const TypeVocabulary& vocab,
                                 const std::vector<Example>& dev,
                                 const DecoderConfig& decoder,
                                 const FitConfig& fit, std::size_t budget);

// Fills in confidences.
void CalibrateAll(const CalibrationParams& params, const FrequencyTable& freq,
                  std::vector<ScoredCandidate>& candidates);

struct Prediction {
  // Kept types, confidence descending (ties by type id).
  std::vector<ScoredCandidate> types;
  // Every beam candidate with its confidence, beam order.
  std::vector<ScoredCandidate> candidates;
};

Prediction ApplyThreshold(const CalibrationParams& params,
                          std::vector<ScoredCandidate> calibrated);

Prediction Predict(Scorer& scorer, const PrefixTrie& trie,
                   const TypeVocabulary& vocab, const CalibrationParams& params,
                   const FrequencyTable& freq, const ScorerContext& context,
                   const DecoderConfig& config);

// Scores every type and returns the most confident; ties go to the lower
// type id. The threshold is not used.
ScoredCandidate PredictSingleLabel(Scorer& scorer, const TypeVocabulary& vocab,
                                   const CalibrationParams& params,
                                   const FrequencyTable& freq,
                                   const ScorerContext& context);

}  // namespace typecal

#endif  // TYPECAL_CALIBRATOR_H_
