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

#include "typecal/toy_scorer.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "typecal/error.h"

namespace typecal {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1), from the top 53 bits.
double UnitInterval(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

}  // namespace

std::vector<std::string> ContextWords(const std::string& text) {
  std::string cleaned = text;
  for (const std::string_view marker : {std::string_view(kMentionClose),
                                        std::string_view(kMentionOpen)}) {
    for (auto pos = cleaned.find(marker); pos != std::string::npos;
         pos = cleaned.find(marker, pos)) {
      cleaned.replace(pos, marker.size(), std::string(marker.size(), ' '));
    }
  }
  std::vector<std::string> words;
  std::string current;
  for (char c : cleaned) {
    if (IsWordChar(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

ToyScorer::ToyScorer(const TypeVocabulary& vocab, std::uint64_t seed,
                     ToyScorerOptions options)
    : alphabet_size_(vocab.token_alphabet_size()),
      seed_(seed),
      options_(options) {
  if (options.smoothing <= 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "toy smoothing must be positive");
  }
  type_tokens_.reserve(vocab.size());
  for (const TypeEntry& entry : vocab.entries()) {
    type_tokens_.push_back(entry.tokens);
    by_name_.emplace(entry.name, entry.id);
  }
  const TokenId n = alphabet_size_ + 1;
  log_row_norm_.resize(n);
  for (TokenId prev = 0; prev < n; ++prev) {
    double total = 0.0;
    for (TokenId next = 0; next < n; ++next) total += BigramWeight(prev, next);
    log_row_norm_[prev] = std::log(total + options_.smoothing * n);
  }
}

double ToyScorer::BigramWeight(TokenId prev, TokenId next) const {
  const std::uint64_t n = static_cast<std::uint64_t>(alphabet_size_) + 1;
  const std::uint64_t cell = static_cast<std::uint64_t>(prev) * n +
                             static_cast<std::uint64_t>(next);
  // Exponential(1) weights give a moderately peaked bigram.
  return -std::log(UnitInterval(SplitMix64(seed_ ^ SplitMix64(cell))));
}

double ToyScorer::BaseLogprob(TokenId prev, TokenId next) const {
  return std::log(BigramWeight(prev, next) + options_.smoothing) -
         log_row_norm_[prev];
}

std::vector<std::pair<TypeId, int>> ToyScorer::Evidence(
    const ScorerContext& context) const {
  std::vector<std::pair<TypeId, int>> evidence;
  if (context.is_empty()) return evidence;
  for (const std::string& word : ContextWords(context.text())) {
    const auto it = by_name_.find(word);
    if (it == by_name_.end()) continue;
    auto found = std::find_if(evidence.begin(), evidence.end(),
                              [&](const auto& e) { return e.first == it->second; });
    if (found == evidence.end()) {
      evidence.emplace_back(it->second, 1);
    } else {
      ++found->second;
    }
  }
  std::sort(evidence.begin(), evidence.end());
  return evidence;
}

TokenDistribution ToyScorer::Distribution(
    const std::vector<std::pair<TypeId, int>>& evidence,
    std::span<const TokenId> prefix) const {
  const TokenId n = alphabet_size_ + 1;
  const TokenId prev = prefix.empty() ? alphabet_size_ : prefix.back();
  TokenDistribution dist{Eigen::VectorXd(n)};
  for (TokenId next = 0; next < n; ++next) {
    dist.logprob[next] = BaseLogprob(prev, next);
  }
  if (evidence.empty()) return dist;

  // Largest evidence count among mentioned types reachable through each
  // next token.
  std::vector<std::pair<TokenId, int>> boosts;
  for (const auto& [type, count] : evidence) {
    const auto& tokens = type_tokens_[type];
    if (tokens.size() < prefix.size() ||
        !std::equal(prefix.begin(), prefix.end(), tokens.begin())) {
      continue;
    }
    const TokenId next =
        tokens.size() == prefix.size() ? alphabet_size_ : tokens[prefix.size()];
    auto it = std::find_if(boosts.begin(), boosts.end(),
                           [&](const auto& b) { return b.first == next; });
    if (it == boosts.end()) {
      boosts.emplace_back(next, count);
    } else {
      it->second = std::max(it->second, count);
    }
  }
  if (boosts.empty()) return dist;
  for (const auto& [token, count] : boosts) {
    dist.logprob[token] += options_.evidence_weight * count;
  }
  dist.logprob.array() -= typecal::LogSumExp(dist.logprob);
  return dist;
}

TokenDistribution ToyScorer::NextTokenLogprobs(const ScorerContext& context,
                                               std::span<const TokenId> prefix) {
  return Distribution(Evidence(context), prefix);
}

std::vector<TokenDistribution> ToyScorer::NextTokenLogprobsBatch(
    const ScorerContext& context,
    const std::vector<std::vector<TokenId>>& prefixes) {
  const auto evidence = Evidence(context);
  std::vector<TokenDistribution> out;
  out.reserve(prefixes.size());
  for (const auto& prefix : prefixes) out.push_back(Distribution(evidence, prefix));
  return out;
}

std::unique_ptr<Scorer> MakeToyScorer(const TypeVocabulary& vocab,
                                      std::uint64_t seed,
                                      ToyScorerOptions options) {
  return std::make_unique<ToyScorer>(vocab, seed, options);
}

BucketBiasScorer::BucketBiasScorer(Scorer& inner, const PrefixTrie& trie,
                                   const FrequencyTable& freq,
                                   std::vector<double> offsets)
    : inner_(inner), trie_(trie), freq_(freq), offsets_(std::move(offsets)) {
  if (offsets_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "bucket offsets must be non-empty");
  }
  for (double offset : offsets_) {
    if (!std::isfinite(offset)) {
      throw Error(ErrorCode::kInvalidArgument, "bucket offsets must be finite");
    }
  }
}

double BucketBiasScorer::OffsetAt(std::span<const TokenId> prefix) const {
  const PrefixTrie::NodeId node = trie_.Find(prefix);
  if (node == PrefixTrie::kNoNode) return 0.0;
  const TypeId type = trie_.TerminalType(node);
  if (type == PrefixTrie::kNoType) return 0.0;
  const auto bucket = static_cast<std::size_t>(freq_.bucket(type));
  return offsets_[std::min(bucket, offsets_.size() - 1)];
}

void BucketBiasScorer::Shift(std::span<const TokenId> prefix,
                             TokenDistribution& dist) const {
  const double offset = OffsetAt(prefix);
  if (offset == 0.0) return;
  const auto eos = static_cast<Eigen::Index>(inner_.token_alphabet_size());
  dist.logprob[eos] += offset;
  dist.logprob.array() -= typecal::LogSumExp(dist.logprob);
}

TokenDistribution BucketBiasScorer::NextTokenLogprobs(
    const ScorerContext& context, std::span<const TokenId> prefix) {
  TokenDistribution dist = inner_.NextTokenLogprobs(context, prefix);
  if (!context.is_empty()) Shift(prefix, dist);
  return dist;
}

std::vector<TokenDistribution> BucketBiasScorer::NextTokenLogprobsBatch(
    const ScorerContext& context,
    const std::vector<std::vector<TokenId>>& prefixes) {
  std::vector<TokenDistribution> out =
      inner_.NextTokenLogprobsBatch(context, prefixes);
  if (!context.is_empty()) {
    for (std::size_t i = 0; i < prefixes.size(); ++i) Shift(prefixes[i], out[i]);
  }
  return out;
}

std::vector<double> LinearBucketOffsets(int num_groups, double slope,
                                        double pivot) {
  if (num_groups <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "num_groups must be positive");
  }
  std::vector<double> offsets(static_cast<std::size_t>(num_groups));
  for (int b = 0; b < num_groups; ++b) offsets[b] = slope * (b - pivot);
  return offsets;
}

}  // namespace typecal
