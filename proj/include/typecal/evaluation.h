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

#ifndef TYPECAL_EVALUATION_H_
#define TYPECAL_EVALUATION_H_

#include <vector>

#include "typecal/calibrator.h"
#include "typecal/metrics.h"

namespace typecal {

// One evaluated example: gold ids (see ResolveGold), the kept prediction set
// and the full calibrated candidate list that calibration metrics score.
struct PredictedExample {
  std::vector<TypeId> gold;
  std::vector<ScoredCandidate> kept;
  std::vector<ScoredCandidate> candidates;
};

struct EvaluationOptions {
  int bins = kDefaultCalibrationBins;
  std::int64_t rare_cutoff = kDefaultRareCutoff;
  // Single-label runs also report accuracy (kept type in gold).
  bool single_label = false;
};

EvalReport Evaluate(const std::vector<PredictedExample>& examples,
                    const FrequencyTable& freq,
                    const EvaluationOptions& options = {});

// Runs prediction over `examples` and evaluates it.
std::vector<PredictedExample> PredictAll(Scorer& scorer, const PrefixTrie& trie,
                                         const TypeVocabulary& vocab,
                                         const CalibrationParams& params,
                                         const FrequencyTable& freq,
                                         const std::vector<Example>& examples,
                                         const DecoderConfig& config,
                                         bool single_label = false);

}  // namespace typecal

#endif  // TYPECAL_EVALUATION_H_
