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

#include "typecal/metrics.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "typecal/error.h"

namespace typecal {
namespace {

int BinIndex(double confidence, int bins) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "confidence outside [0, 1]: " + std::to_string(confidence));
  }
  return std::min(static_cast<int>(confidence * bins), bins - 1);
}

void CheckBins(int bins) {
  if (bins < 1) throw Error(ErrorCode::kInvalidArgument, "bins must be >= 1");
}

nlohmann::ordered_json BinsJson(const std::vector<BinStats>& bins) {
  auto out = nlohmann::ordered_json::array();
  for (const BinStats& b : bins) {
    out.push_back({{"bin", b.bin_index},
                   {"lower", b.lower},
                   {"upper", b.upper},
                   {"count", b.count},
                   {"mean_confidence", b.mean_confidence},
                   {"accuracy", b.empirical_accuracy}});
  }
  return out;
}

}  // namespace

Prf MacroPrfFromCounts(std::span<const PrfCounts> counts) {
  Prf prf;
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  std::size_t predicting = 0;
  std::size_t evaluated = 0;
  for (const PrfCounts& c : counts) {
    if (c.gold == 0) {
      ++prf.excluded;
      continue;
    }
    ++evaluated;
    recall_sum += static_cast<double>(c.true_positive) / static_cast<double>(c.gold);
    if (c.predicted > 0) {
      ++predicting;
      precision_sum +=
          static_cast<double>(c.true_positive) / static_cast<double>(c.predicted);
    }
  }
  if (evaluated == 0) {
    throw Error(ErrorCode::kEmptyEvaluation, "no examples with gold types");
  }
  prf.recall = recall_sum / static_cast<double>(evaluated);
  prf.precision =
      predicting == 0 ? 0.0 : precision_sum / static_cast<double>(predicting);
  const double denom = prf.precision + prf.recall;
  prf.f1 = denom > 0.0 ? 2.0 * prf.precision * prf.recall / denom : 0.0;
  return prf;
}

PrfCounts CountMatches(const LabelSets& sets) {
  std::vector<TypeId> gold = sets.gold;
  std::vector<TypeId> pred = sets.predicted;
  std::sort(gold.begin(), gold.end());
  gold.erase(std::unique(gold.begin(), gold.end()), gold.end());
  std::sort(pred.begin(), pred.end());
  pred.erase(std::unique(pred.begin(), pred.end()), pred.end());
  std::vector<TypeId> common;
  std::set_intersection(gold.begin(), gold.end(), pred.begin(), pred.end(),
                        std::back_inserter(common));
  return {static_cast<std::int64_t>(common.size()),
          static_cast<std::int64_t>(pred.size()),
          static_cast<std::int64_t>(gold.size())};
}

Prf MacroPrf(std::span<const LabelSets> examples) {
  if (examples.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "no examples to evaluate");
  }
  std::vector<PrfCounts> counts;
  counts.reserve(examples.size());
  for (const LabelSets& e : examples) counts.push_back(CountMatches(e));
  return MacroPrfFromCounts(counts);
}

std::vector<BinStats> BinOutcomes(std::span<const ScoredOutcome> scored,
                                  int bins) {
  CheckBins(bins);
  std::vector<BinStats> out(bins);
  std::vector<double> confidence_sum(bins, 0.0);
  std::vector<std::int64_t> correct(bins, 0);
  for (const ScoredOutcome& s : scored) {
    const int b = BinIndex(s.confidence, bins);
    ++out[b].count;
    confidence_sum[b] += s.confidence;
    if (s.correct) ++correct[b];
  }
  for (int b = 0; b < bins; ++b) {
    BinStats& stats = out[b];
    stats.bin_index = b;
    stats.lower = static_cast<double>(b) / bins;
    stats.upper = static_cast<double>(b + 1) / bins;
    if (stats.count > 0) {
      const auto n = static_cast<double>(stats.count);
      stats.mean_confidence = confidence_sum[b] / n;
      stats.empirical_accuracy = static_cast<double>(correct[b]) / n;
    }
  }
  return out;
}

double Ece(std::span<const ScoredOutcome> scored, int bins) {
  if (scored.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "ECE of an empty population");
  }
  const auto total = static_cast<double>(scored.size());
  double ece = 0.0;
  for (const BinStats& b : BinOutcomes(scored, bins)) {
    if (b.count == 0) continue;
    ece += (static_cast<double>(b.count) / total) *
           std::abs(b.empirical_accuracy - b.mean_confidence);
  }
  return ece;
}

double Tce(std::span<const ScoredOutcome> scored, int bins) {
  if (scored.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "TCE of an empty population");
  }
  double tce = 0.0;
  for (const BinStats& b : BinOutcomes(scored, bins)) {
    if (b.count == 0) continue;
    tce += std::abs(b.empirical_accuracy - b.mean_confidence);
  }
  return tce;
}

ReliabilityTables Reliability(std::span<const FrequencyScoredOutcome> scored,
                              int bins, std::int64_t rare_cutoff) {
  if (scored.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "reliability of an empty population");
  }
  std::vector<ScoredOutcome> rare;
  std::vector<ScoredOutcome> frequent;
  for (const FrequencyScoredOutcome& s : scored) {
    (s.frequency < rare_cutoff ? rare : frequent)
        .push_back({s.confidence, s.correct});
  }
  return {BinOutcomes(rare, bins), BinOutcomes(frequent, bins)};
}

std::string EvalReportJson(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["macro_p"] = report.macro_p;
  j["macro_r"] = report.macro_r;
  j["macro_f1"] = report.macro_f1;
  j["accuracy"] = report.accuracy ? nlohmann::ordered_json(*report.accuracy)
                                  : nlohmann::ordered_json(nullptr);
  j["ece"] = report.ece;
  j["tce"] = report.tce;
  j["n_examples"] = report.n_examples;
  j["n_scored"] = report.n_scored;
  j["n_excluded"] = report.n_excluded;
  j["bins"] = report.bins;
  j["rare_cutoff"] = report.rare_cutoff;
  j["tce_definition"] = kTceDefinition;
  j["calibration_bins"] = BinsJson(report.all_bins);
  j["reliability"] = {{"rare", BinsJson(report.reliability.rare)},
                      {"frequent", BinsJson(report.reliability.frequent)}};
  return j.dump(2) + "\n";
}

void WriteBinsCsv(const EvalReport& report, std::ostream& out) {
  out << "group,bin,lower,upper,count,mean_confidence,accuracy\n";
  const auto emit = [&](const char* group, const std::vector<BinStats>& bins) {
    for (const BinStats& b : bins) {
      out << group << ',' << b.bin_index << ',' << b.lower << ',' << b.upper
          << ',' << b.count << ',' << b.mean_confidence << ','
          << b.empirical_accuracy << '\n';
    }
  };
  emit("all", report.all_bins);
  emit("rare", report.reliability.rare);
  emit("frequent", report.reliability.frequent);
}

}  // namespace typecal
