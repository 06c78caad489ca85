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

#include "typecal/evaluation.h"

#include <algorithm>

#include "typecal/error.h"

namespace typecal {

EvalReport Evaluate(const std::vector<PredictedExample>& examples,
                    const FrequencyTable& freq,
                    const EvaluationOptions& options) {
  if (examples.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "no examples to evaluate");
  }
  std::vector<LabelSets> sets;
  std::vector<FrequencyScoredOutcome> scored;
  std::size_t correct_single = 0;
  for (const PredictedExample& ex : examples) {
    LabelSets s{ex.gold, {}};
    for (const ScoredCandidate& c : ex.kept) s.predicted.push_back(c.type_id);
    const auto in_gold = [&](TypeId t) {
      return std::find(ex.gold.begin(), ex.gold.end(), t) != ex.gold.end();
    };
    if (!ex.kept.empty() && in_gold(ex.kept.front().type_id)) ++correct_single;
    for (const ScoredCandidate& c : ex.candidates) {
      scored.push_back({c.confidence.value(), in_gold(c.type_id), freq.count(c.type_id)});
    }
    sets.push_back(std::move(s));
  }
  const Prf prf = MacroPrf(sets);

  EvalReport report;
  report.macro_p = prf.precision;
  report.macro_r = prf.recall;
  report.macro_f1 = prf.f1;
  report.n_examples = examples.size();
  report.n_excluded = prf.excluded;
  report.n_scored = scored.size();
  report.bins = options.bins;
  report.rare_cutoff = options.rare_cutoff;
  if (options.single_label) {
    report.accuracy =
        static_cast<double>(correct_single) / static_cast<double>(examples.size());
  }
  if (scored.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "no scored candidates");
  }
  std::vector<ScoredOutcome> outcomes;
  outcomes.reserve(scored.size());
  for (const auto& s : scored) outcomes.push_back({s.confidence, s.correct});
  report.ece = Ece(outcomes, options.bins);
  report.tce = Tce(outcomes, options.bins);
  report.all_bins = BinOutcomes(outcomes, options.bins);
  report.reliability = Reliability(scored, options.bins, options.rare_cutoff);
  return report;
}

std::vector<PredictedExample> PredictAll(Scorer& scorer, const PrefixTrie& trie,
                                         const TypeVocabulary& vocab,
                                         const CalibrationParams& params,
                                         const FrequencyTable& freq,
                                         const std::vector<Example>& examples,
                                         const DecoderConfig& config,
                                         bool single_label) {
  std::vector<PredictedExample> out;
  out.reserve(examples.size());
  for (const Example& example : examples) {
    const ScorerContext context = ScorerContext::FromExample(example);
    PredictedExample p;
    p.gold = ResolveGold(example, vocab);
    if (single_label) {
      const ScoredCandidate best =
          PredictSingleLabel(scorer, vocab, params, freq, context);
      p.kept = {best};
      p.candidates = {best};
    } else {
      Prediction prediction =
          Predict(scorer, trie, vocab, params, freq, context, config);
      p.kept = std::move(prediction.types);
      p.candidates = std::move(prediction.candidates);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace typecal
