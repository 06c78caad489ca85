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

#include "typecal/scorer.h"

#include <cmath>
#include <limits>

#include "typecal/error.h"

namespace typecal {

ScorerContext ScorerContext::FromText(std::string text, std::string cache_key) {
  if (cache_key.empty() || cache_key == kEmptyKey) {
    throw Error(ErrorCode::kInvalidArgument,
                "context cache key must be non-empty and not '" +
                    std::string(kEmptyKey) + "'");
  }
  ScorerContext ctx;
  ctx.empty_ = false;
  ctx.text_ = std::move(text);
  ctx.key_ = std::move(cache_key);
  return ctx;
}

ScorerContext ScorerContext::FromExample(const Example& example) {
  return FromText(example.context, example.id);
}

double LogSumExp(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) return -std::numeric_limits<double>::infinity();
  const double max = values.maxCoeff();
  if (!std::isfinite(max)) return max;
  return max + std::log((values.array() - max).exp().sum());
}

double TokenDistribution::LogSumExp() const { return typecal::LogSumExp(logprob); }

std::vector<TokenDistribution> Scorer::NextTokenLogprobsBatch(
    const ScorerContext& context,
    const std::vector<std::vector<TokenId>>& prefixes) {
  std::vector<TokenDistribution> out;
  out.reserve(prefixes.size());
  for (const auto& prefix : prefixes) {
    out.push_back(NextTokenLogprobs(context, prefix));
  }
  return out;
}

SequenceScore SequenceLogprob(Scorer& scorer, const ScorerContext& context,
                              std::span<const TokenId> tokens,
                              const ScoringOptions& options) {
  if (tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot score an empty sequence");
  }
  const std::int32_t alphabet = scorer.token_alphabet_size();
  for (TokenId t : tokens) {
    if (t < 0 || t >= alphabet) {
      throw Error(ErrorCode::kTokenOutOfRange,
                  "token " + std::to_string(t) + " outside alphabet");
    }
  }
  const std::size_t k = tokens.size();
  const std::size_t steps = options.normalize_include_eos ? k + 1 : k;
  std::vector<std::vector<TokenId>> prefixes;
  prefixes.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    prefixes.emplace_back(tokens.begin(), tokens.begin() + i);
  }
  const auto dists = scorer.NextTokenLogprobsBatch(context, prefixes);

  SequenceScore score;
  score.length = k;
  score.step_logprobs.reserve(steps);
  double sum = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const TokenId next = i < k ? tokens[i] : alphabet;
    const double lp = dists[i][next];
    score.step_logprobs.push_back(lp);
    sum += lp;
  }
  score.mean_logprob = sum / static_cast<double>(steps);
  return score;
}

TokenDistribution UniformScorer::NextTokenLogprobs(
    const ScorerContext& /*context*/, std::span<const TokenId> /*prefix*/) {
  const Eigen::Index n = alphabet_size_ + 1;
  return {Eigen::VectorXd::Constant(n, -std::log(static_cast<double>(n)))};
}

}  // namespace typecal
