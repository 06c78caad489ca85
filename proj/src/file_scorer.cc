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

#include "typecal/file_scorer.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "typecal/error.h"

namespace typecal {
namespace {

constexpr char kEosKey[] = "EOS";

std::string PrefixString(std::span<const TokenId> prefix) {
  std::string s = "[";
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(prefix[i]);
  }
  return s + "]";
}

TokenId ParseTokenKey(const std::string& key, std::int32_t alphabet) {
  if (key == kEosKey) return alphabet;
  TokenId token = -1;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), token);
  if (ec != std::errc() || ptr != key.data() + key.size() || token < 0 ||
      token >= alphabet) {
    throw Error(ErrorCode::kFormatError, "bad distribution key '" + key + "'");
  }
  return token;
}

nlohmann::ordered_json DistributionJson(const Eigen::VectorXd& logprob) {
  nlohmann::ordered_json dist = nlohmann::ordered_json::object();
  const Eigen::Index eos = logprob.size() - 1;
  for (Eigen::Index t = 0; t < logprob.size(); ++t) {
    if (!std::isfinite(logprob[t])) continue;
    dist[t == eos ? std::string(kEosKey) : std::to_string(t)] = logprob[t];
  }
  return dist;
}

}  // namespace

FileScorer::FileScorer(std::istream& in, std::int32_t token_alphabet_size)
    : alphabet_size_(token_alphabet_size) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "fixture line " + std::to_string(line_no) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      Key key{j.at("ctx").get<std::string>(), {}};
      for (const auto& t : j.at("prefix")) {
        const auto token = t.get<TokenId>();
        if (token < 0 || token >= alphabet_size_) {
          throw Error(ErrorCode::kFormatError, "prefix token out of range");
        }
        key.second.push_back(token);
      }
      Eigen::VectorXd logprob = Eigen::VectorXd::Constant(
          alphabet_size_ + 1, -std::numeric_limits<double>::infinity());
      const auto& dist = j.at("dist");
      if (!dist.is_object()) throw Error(ErrorCode::kFormatError, "dist not an object");
      for (const auto& [k, v] : dist.items()) {
        if (!v.is_number()) {
          throw Error(ErrorCode::kFormatError, "non-numeric logprob for " + k);
        }
        const double lp = v.get<double>();
        if (!(lp <= kNormalizationTolerance)) {
          throw Error(ErrorCode::kFormatError, "positive logprob for " + k);
        }
        logprob[ParseTokenKey(k, alphabet_size_)] = lp;
      }
      const double lse = LogSumExp(logprob);
      if (!(std::abs(lse) <= kNormalizationTolerance)) {
        throw Error(ErrorCode::kFormatError,
                    "distribution not normalized (logsumexp " +
                        std::to_string(lse) + ")");
      }
      if (!records_.emplace(std::move(key), std::move(logprob)).second) {
        throw Error(ErrorCode::kFormatError, "duplicate (ctx, prefix) record");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, where + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + e.message());
    }
  }
}

TokenDistribution FileScorer::NextTokenLogprobs(const ScorerContext& context,
                                                std::span<const TokenId> prefix) {
  const Key key{context.cache_key(), {prefix.begin(), prefix.end()}};
  const auto it = records_.find(key);
  if (it == records_.end()) {
    throw Error(ErrorCode::kMissingDistribution,
                "no record for ctx=" + context.cache_key() +
                    " prefix=" + PrefixString(prefix));
  }
  return {it->second};
}

std::unique_ptr<Scorer> LoadFileScorer(const std::string& path,
                                       std::int32_t token_alphabet_size) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open scorer fixture " + path);
  return std::make_unique<FileScorer>(in, token_alphabet_size);
}

void RecordingScorer::Remember(const ScorerContext& context,
                               std::span<const TokenId> prefix,
                               const TokenDistribution& dist) {
  Key key{context.cache_key(), {prefix.begin(), prefix.end()}};
  Record record;
  if (!context.is_empty()) record.text = context.text();
  record.logprob = dist.logprob;
  records_.insert_or_assign(std::move(key), std::move(record));
}

TokenDistribution RecordingScorer::NextTokenLogprobs(
    const ScorerContext& context, std::span<const TokenId> prefix) {
  TokenDistribution dist = inner_.NextTokenLogprobs(context, prefix);
  Remember(context, prefix, dist);
  return dist;
}

std::vector<TokenDistribution> RecordingScorer::NextTokenLogprobsBatch(
    const ScorerContext& context,
    const std::vector<std::vector<TokenId>>& prefixes) {
  auto dists = inner_.NextTokenLogprobsBatch(context, prefixes);
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    Remember(context, prefixes[i], dists[i]);
  }
  return dists;
}

void RecordingScorer::WriteFixture(std::ostream& out) const {
  for (const auto& [key, record] : records_) {
    nlohmann::ordered_json j;
    j["ctx"] = key.first;
    j["prefix"] = key.second;
    j["dist"] = DistributionJson(record.logprob);
    out << j.dump() << '\n';
  }
}

void RecordingScorer::WriteTrace(std::ostream& out) const {
  for (const auto& [key, record] : records_) {
    nlohmann::ordered_json j;
    j["ctx"] = key.first;
    j["text"] = record.text ? nlohmann::ordered_json(*record.text)
                            : nlohmann::ordered_json(nullptr);
    j["prefix"] = key.second;
    out << j.dump() << '\n';
  }
}

}  // namespace typecal
