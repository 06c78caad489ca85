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

#ifndef TYPECAL_DECODER_H_
#define TYPECAL_DECODER_H_

#include <optional>
#include <vector>

#include "typecal/scorer.h"
#include "typecal/type_vocab.h"

namespace typecal {

inline constexpr int kDefaultBeamSize = 24;

struct DecoderConfig {
  int beam_size = kDefaultBeamSize;
  // 0 selects the longest type length + 1.
  int max_steps = 0;
  bool normalize_include_eos = true;

  ScoringOptions scoring() const { return {normalize_include_eos}; }
  // Throws kInvalidConfig unless beam_size >= 1 and max_steps (once
  // resolved) covers the longest type plus its eos step.
  int ResolvedMaxSteps(const TypeVocabulary& vocab) const;
};

struct ScoredCandidate {
  TypeId type_id = 0;
  double mean_logprob = 0.0;  // Length-normalized log p(t | e).
  double bias_logprob = 0.0;  // Length-normalized log p(t | empty input).
  std::optional<double> confidence;
};

// Trie-constrained beam search. Live hypotheses are pruned on cumulative
// log-probability; a hypothesis choosing eos among the top beam_size
// expansions of a step moves to the completed pool. Search stops once
// beam_size types are complete, no hypothesis is live, or max_steps is
// reached. The result holds up to beam_size types sorted by mean_logprob
// descending, ties by ascending type id; bias_logprob is scored for each.
std::vector<ScoredCandidate> BeamSearch(Scorer& scorer, const PrefixTrie& trie,
                                        const TypeVocabulary& vocab,
                                        const ScorerContext& context,
                                        const DecoderConfig& config);

// Scores every vocabulary type; same ordering as BeamSearch.
std::vector<ScoredCandidate> ScoreAllTypes(Scorer& scorer,
                                           const TypeVocabulary& vocab,
                                           const ScorerContext& context,
                                           const ScoringOptions& options = {});

void SortByMeanLogprob(std::vector<ScoredCandidate>& candidates);

}  // namespace typecal

#endif  // TYPECAL_DECODER_H_
