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

#include "typecal/decoder.h"

#include <algorithm>
#include <cmath>

#include "typecal/error.h"

namespace typecal {
namespace {

struct Hypothesis {
  PrefixTrie::NodeId node = PrefixTrie::kRoot;
  std::vector<TokenId> tokens;
  double cumulative = 0.0;
};

struct Expansion {
  double score;
  std::size_t hyp;
  TokenId token;
};

struct Completed {
  TypeId type_id;
  double mean_logprob;
};

}  // namespace

int DecoderConfig::ResolvedMaxSteps(const TypeVocabulary& vocab) const {
  if (beam_size < 1) {
    throw Error(ErrorCode::kInvalidConfig, "beam_size must be >= 1");
  }
  const int needed = static_cast<int>(vocab.max_type_length()) + 1;
  if (max_steps == 0) return needed;
  if (max_steps < needed) {
    throw Error(ErrorCode::kInvalidConfig,
                "max_steps " + std::to_string(max_steps) +
                    " is below longest type length + 1 = " +
                    std::to_string(needed));
  }
  return max_steps;
}

void SortByMeanLogprob(std::vector<ScoredCandidate>& candidates) {
  std::sort(candidates.begin(), candidates.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.mean_logprob != b.mean_logprob) {
                return a.mean_logprob > b.mean_logprob;
              }
              return a.type_id < b.type_id;
            });
}

std::vector<ScoredCandidate> BeamSearch(Scorer& scorer, const PrefixTrie& trie,
                                        const TypeVocabulary& vocab,
                                        const ScorerContext& context,
                                        const DecoderConfig& config) {
  const int max_steps = config.ResolvedMaxSteps(vocab);
  const auto beam = static_cast<std::size_t>(config.beam_size);
  const TokenId eos = vocab.eos_token();

  std::vector<Hypothesis> live(1);
  std::vector<Completed> completed;
  std::vector<Expansion> expansions;

  for (int step = 0; step < max_steps && !live.empty() && completed.size() < beam;
       ++step) {
    std::vector<std::vector<TokenId>> prefixes;
    prefixes.reserve(live.size());
    for (const Hypothesis& h : live) prefixes.push_back(h.tokens);
    const auto dists = scorer.NextTokenLogprobsBatch(context, prefixes);

    expansions.clear();
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (TokenId token : trie.AllowedAt(live[i].node)) {
        const double score = live[i].cumulative + dists[i][token];
        if (std::isfinite(score)) expansions.push_back({score, i, token});
      }
    }
    std::sort(expansions.begin(), expansions.end(),
              [](const Expansion& a, const Expansion& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.hyp != b.hyp) return a.hyp < b.hyp;
                return a.token < b.token;
              });

    std::vector<Hypothesis> next;
    next.reserve(beam);
    for (std::size_t rank = 0; rank < expansions.size(); ++rank) {
      if (rank >= beam && next.size() >= beam) break;
      const Expansion& e = expansions[rank];
      const Hypothesis& parent = live[e.hyp];
      if (e.token == eos) {
        if (rank >= beam) continue;
        const double k = static_cast<double>(parent.tokens.size());
        const double mean = config.normalize_include_eos
                                ? e.score / (k + 1.0)
                                : parent.cumulative / k;
        completed.push_back({trie.TerminalType(parent.node), mean});
      } else if (next.size() < beam) {
        Hypothesis child;
        child.node = trie.Child(parent.node, e.token);
        child.tokens = parent.tokens;
        child.tokens.push_back(e.token);
        child.cumulative = e.score;
        next.push_back(std::move(child));
      }
    }
    live = std::move(next);
  }

  std::vector<ScoredCandidate> result;
  result.reserve(completed.size());
  for (const Completed& c : completed) {
    result.push_back({c.type_id, c.mean_logprob, 0.0, std::nullopt});
  }
  SortByMeanLogprob(result);
  if (result.size() > beam) result.resize(beam);
  for (ScoredCandidate& c : result) {
    c.bias_logprob =
        BiasLogprob(scorer, vocab.entry(c.type_id).tokens, config.scoring())
            .mean_logprob;
  }
  return result;
}

std::vector<ScoredCandidate> ScoreAllTypes(Scorer& scorer,
                                           const TypeVocabulary& vocab,
                                           const ScorerContext& context,
                                           const ScoringOptions& options) {
  if (vocab.empty()) {
    throw Error(ErrorCode::kEmptyVocabulary, "cannot score an empty vocabulary");
  }
  std::vector<ScoredCandidate> result;
  result.reserve(vocab.size());
  for (const TypeEntry& entry : vocab.entries()) {
    result.push_back(
        {entry.id, SequenceLogprob(scorer, context, entry.tokens, options).mean_logprob,
         BiasLogprob(scorer, entry.tokens, options).mean_logprob, std::nullopt});
  }
  SortByMeanLogprob(result);
  return result;
}

}  // namespace typecal
