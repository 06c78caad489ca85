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

#ifndef TYPECAL_SCORER_H_
#define TYPECAL_SCORER_H_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "typecal/dataset.h"
#include "typecal/type_vocab.h"

namespace typecal {

// Conditioning input for the next-token model: either a rendered mention
// context or the distinguished empty input used for the model-bias score.
class ScorerContext {
 public:
  static ScorerContext Empty() { return ScorerContext(); }
  // `cache_key` must be non-empty and must not be kEmptyKey.
  static ScorerContext FromText(std::string text, std::string cache_key);
  static ScorerContext FromExample(const Example& example);

  bool is_empty() const { return empty_; }
  const std::string& text() const { return text_; }
  // kEmptyKey for the empty context.
  const std::string& cache_key() const { return key_; }

  static constexpr char kEmptyKey[] = "EMPTY";

 private:
  ScorerContext() : key_(kEmptyKey) {}

  bool empty_ = true;
  std::string text_;
  std::string key_;
};

// Log-probabilities over token ids 0..V-1 followed by eos at index V.
struct TokenDistribution {
  Eigen::VectorXd logprob;

  double operator[](TokenId token) const { return logprob[token]; }
  Eigen::Index size() const { return logprob.size(); }
  double LogSumExp() const;
};

double LogSumExp(const Eigen::Ref<const Eigen::VectorXd>& values);

struct SequenceScore {
  double mean_logprob = 0.0;
  // The averaged steps: one per type token, plus the eos step when eos is
  // included in the normalization.
  std::vector<double> step_logprobs;
  std::size_t length = 0;  // Number of type tokens.
};

struct ScoringOptions {
  // Average over k type tokens plus the eos step; when false, average over
  // the k type tokens only.
  bool normalize_include_eos = true;
};

class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::int32_t token_alphabet_size() const = 0;

  virtual TokenDistribution NextTokenLogprobs(
      const ScorerContext& context, std::span<const TokenId> prefix) = 0;

  // One distribution per prefix, in order. The default loops over
  // NextTokenLogprobs; network backends send a single request.
  virtual std::vector<TokenDistribution> NextTokenLogprobsBatch(
      const ScorerContext& context,
      const std::vector<std::vector<TokenId>>& prefixes);
};

// Length-normalized log-likelihood of `tokens` under `context`.
SequenceScore SequenceLogprob(Scorer& scorer, const ScorerContext& context,
                              std::span<const TokenId> tokens,
                              const ScoringOptions& options = {});

// SequenceLogprob under the empty context.
inline SequenceScore BiasLogprob(Scorer& scorer,
                                 std::span<const TokenId> tokens,
                                 const ScoringOptions& options = {}) {
  return SequenceLogprob(scorer, ScorerContext::Empty(), tokens, options);
}

// Every token (eos included) gets log(1 / (V + 1)), for any context.
class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(std::int32_t token_alphabet_size)
      : alphabet_size_(token_alphabet_size) {}

  std::int32_t token_alphabet_size() const override { return alphabet_size_; }
  TokenDistribution NextTokenLogprobs(const ScorerContext& context,
                                      std::span<const TokenId> prefix) override;

 private:
  std::int32_t alphabet_size_;
};

}  // namespace typecal

#endif  // TYPECAL_SCORER_H_
