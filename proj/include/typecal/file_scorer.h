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

#ifndef TYPECAL_FILE_SCORER_H_
#define TYPECAL_FILE_SCORER_H_

#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "typecal/scorer.h"

namespace typecal {

// Replays recorded distributions. Each line of the fixture is
//   {"ctx": <cache key or "EMPTY">, "prefix": [ids],
//    "dist": {"<token id>" | "EOS": logprob, ...}}
// Tokens absent from "dist" have probability zero. Every record must be
// normalized within kNormalizationTolerance. Safe for concurrent queries.
class FileScorer : public Scorer {
 public:
  static constexpr double kNormalizationTolerance = 1e-4;

  FileScorer(std::istream& in, std::int32_t token_alphabet_size);

  std::int32_t token_alphabet_size() const override { return alphabet_size_; }
  TokenDistribution NextTokenLogprobs(const ScorerContext& context,
                                      std::span<const TokenId> prefix) override;

  std::size_t num_records() const { return records_.size(); }

 private:
  using Key = std::pair<std::string, std::vector<TokenId>>;

  std::int32_t alphabet_size_;
  std::map<Key, Eigen::VectorXd> records_;
};

std::unique_ptr<Scorer> LoadFileScorer(const std::string& path,
                                       std::int32_t token_alphabet_size);

// Forwards to another scorer and remembers every (context, prefix) query and
// its answer. WriteFixture emits the FileScorer format; WriteTrace emits one
// {"ctx", "text", "prefix"} line per distinct query (text is null for the
// empty context). Output order is sorted by (cache key, prefix).
class RecordingScorer : public Scorer {
 public:
  explicit RecordingScorer(Scorer& inner) : inner_(inner) {}

  std::int32_t token_alphabet_size() const override {
    return inner_.token_alphabet_size();
  }
  TokenDistribution NextTokenLogprobs(const ScorerContext& context,
                                      std::span<const TokenId> prefix) override;
  std::vector<TokenDistribution> NextTokenLogprobsBatch(
      const ScorerContext& context,
      const std::vector<std::vector<TokenId>>& prefixes) override;

  void WriteFixture(std::ostream& out) const;
  void WriteTrace(std::ostream& out) const;
  std::size_t num_queries() const { return records_.size(); }

 private:
  struct Record {
    std::optional<std::string> text;
    Eigen::VectorXd logprob;
  };
  using Key = std::pair<std::string, std::vector<TokenId>>;

  void Remember(const ScorerContext& context, std::span<const TokenId> prefix,
                const TokenDistribution& dist);

  Scorer& inner_;
  std::map<Key, Record> records_;
};

}  // namespace typecal

#endif  // TYPECAL_FILE_SCORER_H_
