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

#ifndef TYPECAL_TOY_SCORER_H_
#define TYPECAL_TOY_SCORER_H_

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "typecal/scorer.h"
#include "typecal/type_vocab.h"

namespace typecal {

struct ToyScorerOptions {
  // Additive smoothing on the bigram weights.
  double smoothing = 0.5;
  // Logit boost per occurrence of a type name in the context text.
  double evidence_weight = 2.5;
};

// Deterministic stand-in for a seq2seq model. The unconditioned part is a
// smoothed bigram over token ids whose weights are drawn from a hash of
// (seed, previous token, next token); the previous token of an empty prefix
// is a begin marker. A non-empty context adds evidence: each whitespace word
// of the context that equals a type name raises the logits of tokens leading
// into that type (and of eos once the type is complete) by
// evidence_weight * occurrences. The empty context carries no evidence.
//
// Safe for concurrent queries.
class ToyScorer : public Scorer {
 public:
  ToyScorer(const TypeVocabulary& vocab, std::uint64_t seed,
            ToyScorerOptions options = {});

  std::int32_t token_alphabet_size() const override { return alphabet_size_; }

  TokenDistribution NextTokenLogprobs(const ScorerContext& context,
                                      std::span<const TokenId> prefix) override;
  std::vector<TokenDistribution> NextTokenLogprobsBatch(
      const ScorerContext& context,
      const std::vector<std::vector<TokenId>>& prefixes) override;

  // Unnormalized bigram weight; `prev` == alphabet size is the begin marker,
  // `next` == alphabet size is eos.
  double BigramWeight(TokenId prev, TokenId next) const;
  // log P(next | prev) under the base bigram (no context evidence).
  double BaseLogprob(TokenId prev, TokenId next) const;

  // Occurrence counts of vocabulary type names among the context's words.
  std::vector<std::pair<TypeId, int>> Evidence(
      const ScorerContext& context) const;

 private:
  TokenDistribution Distribution(
      const std::vector<std::pair<TypeId, int>>& evidence,
      std::span<const TokenId> prefix) const;

  std::vector<std::vector<TokenId>> type_tokens_;
  std::unordered_map<std::string, TypeId> by_name_;
  std::int32_t alphabet_size_;
  std::uint64_t seed_;
  ToyScorerOptions options_;
  std::vector<double> log_row_norm_;  // Indexed by prev.
};

// Wraps a scorer and shifts the eos logit of every complete type by a
// per-bucket offset, then renormalizes. Only non-empty contexts are shifted,
// so the bias score under the empty context stays that of the inner scorer.
// Used to give the toy benchmark a known frequency-dependent miscalibration.
//
// Thread safety follows the inner scorer.
class BucketBiasScorer : public Scorer {
 public:
  // `offsets` is indexed by frequency bucket; buckets past its end use the
  // last entry. The vocabulary, trie and table must outlive the scorer.
  BucketBiasScorer(Scorer& inner, const PrefixTrie& trie,
                   const FrequencyTable& freq, std::vector<double> offsets);

  std::int32_t token_alphabet_size() const override {
    return inner_.token_alphabet_size();
  }
  TokenDistribution NextTokenLogprobs(const ScorerContext& context,
                                      std::span<const TokenId> prefix) override;
  std::vector<TokenDistribution> NextTokenLogprobsBatch(
      const ScorerContext& context,
      const std::vector<std::vector<TokenId>>& prefixes) override;

  // Offset applied to the eos logit after the prefix, 0 when it is no type.
  double OffsetAt(std::span<const TokenId> prefix) const;

 private:
  void Shift(std::span<const TokenId> prefix, TokenDistribution& dist) const;

  Scorer& inner_;
  const PrefixTrie& trie_;
  const FrequencyTable& freq_;
  std::vector<double> offsets_;
};

// offsets[b] = slope * (b - pivot) for b in [0, num_groups).
std::vector<double> LinearBucketOffsets(int num_groups, double slope,
                                        double pivot);

std::unique_ptr<Scorer> MakeToyScorer(const TypeVocabulary& vocab,
                                      std::uint64_t seed,
                                      ToyScorerOptions options = {});

// Splits context text into words: the mention markers and surrounding
// punctuation are treated as separators; '_' is part of a word.
std::vector<std::string> ContextWords(const std::string& text);

}  // namespace typecal

#endif  // TYPECAL_TOY_SCORER_H_
