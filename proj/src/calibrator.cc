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

#include "typecal/calibrator.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "typecal/error.h"
#include "typecal/logistic.h"
#include "typecal/metrics.h"

namespace typecal {
namespace {

constexpr int kParamsFormat = 1;

enum class Fallback { kNearestLower, kGlobalOnly };

struct GroupFit {
  std::vector<CalibrationWeights> weights;
  std::vector<GroupSummary> groups;
};

std::size_t CountPositives(std::span<const CalibrationPoint> points) {
  return static_cast<std::size_t>(std::count_if(
      points.begin(), points.end(), [](const auto& p) { return p.y > 0; }));
}

// Parameters fit on every point; when even the pooled data is degenerate,
// a constant confidence at the smoothed positive rate.
CalibrationWeights FitGlobal(const CalibrationData& data, const FitConfig& fit,
                             bool use_bias_feature) {
  std::vector<CalibrationPoint> all;
  for (const auto& group : data) all.insert(all.end(), group.begin(), group.end());
  try {
    return FitLogisticRegression(all, fit, use_bias_feature);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateBucket) throw;
  }
  const auto positives = static_cast<double>(CountPositives(all));
  const auto negatives = static_cast<double>(all.size()) - positives;
  return {0.0, 0.0, std::log((positives + 0.5) / (negatives + 0.5))};
}

GroupFit FitGroups(const CalibrationData& data, const FitConfig& fit,
                   bool use_bias_feature, Fallback fallback) {
  GroupFit out;
  out.weights.resize(data.size());
  out.groups.resize(data.size());
  std::optional<CalibrationWeights> global;
  for (std::size_t i = 0; i < data.size(); ++i) {
    GroupSummary& summary = out.groups[i];
    summary.points = data[i].size();
    summary.positives = CountPositives(data[i]);
    try {
      out.weights[i] = FitLogisticRegression(data[i], fit, use_bias_feature);
      summary.status = GroupSummary::Status::kFitted;
      continue;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateBucket) throw;
    }
    if (fallback == Fallback::kNearestLower) {
      for (std::size_t j = i; j-- > 0;) {
        if (out.groups[j].status == GroupSummary::Status::kFitted) {
          out.weights[i] = out.weights[j];
          summary.status = GroupSummary::Status::kInherited;
          summary.inherited_from = static_cast<int>(j);
          break;
        }
      }
      if (summary.status == GroupSummary::Status::kInherited) continue;
    }
    if (!global) global = FitGlobal(data, fit, use_bias_feature);
    out.weights[i] = *global;
    summary.status = GroupSummary::Status::kGlobal;
  }
  return out;
}

CalibrationParams BaseParams(CalibrationMode mode, const DecoderConfig& decoder,
                             const FitConfig& fit) {
  CalibrationParams params;
  params.mode = mode;
  params.normalize_include_eos = decoder.normalize_include_eos;
  params.fit_config = fit;
  return params;
}

}  // namespace

std::string_view ModeName(CalibrationMode mode) {
  switch (mode) {
    case CalibrationMode::kBucketed: return "bucketed";
    case CalibrationMode::kPerType: return "per_type";
    case CalibrationMode::kShared: return "shared";
    case CalibrationMode::kNoBias: return "no_bias";
    case CalibrationMode::kNone: return "none";
  }
  return "unknown";
}

CalibrationMode ParseMode(std::string_view name) {
  std::string canonical(name);
  std::replace(canonical.begin(), canonical.end(), '-', '_');
  for (auto mode : {CalibrationMode::kBucketed, CalibrationMode::kPerType,
                    CalibrationMode::kShared, CalibrationMode::kNoBias,
                    CalibrationMode::kNone}) {
    if (ModeName(mode) == canonical) return mode;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown calibration mode '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Parameter files

std::string ParamsToJson(const CalibrationParams& params) {
  nlohmann::ordered_json j;
  j["format"] = kParamsFormat;
  j["mode"] = std::string(ModeName(params.mode));
  j["n_groups"] = params.n_groups();
  auto weights = nlohmann::ordered_json::array();
  for (const CalibrationWeights& w : params.weights) {
    weights.push_back({w.w1, w.w2, w.b});
  }
  j["weights"] = std::move(weights);
  j["threshold"] = params.threshold;
  j["normalize_include_eos"] = params.normalize_include_eos;
  j["fit_config"] = {{"l2_lambda", params.fit_config.l2_lambda},
                     {"max_iters", params.fit_config.max_iters},
                     {"tol", params.fit_config.tol},
                     {"min_points_per_bucket", params.fit_config.min_points_per_bucket},
                     {"min_positive_per_bucket",
                      params.fit_config.min_positive_per_bucket}};
  return j.dump(2) + "\n";
}

CalibrationParams ParamsFromJson(const std::string& text) {
  CalibrationParams params;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<int>() != kParamsFormat) {
      throw Error(ErrorCode::kFormatError,
                  "unsupported params format " + j.at("format").dump());
    }
    params.mode = ParseMode(j.at("mode").get<std::string>());
    for (const auto& w : j.at("weights")) {
      if (!w.is_array() || w.size() != 3) {
        throw Error(ErrorCode::kFormatError, "weights entries must be [w1, w2, b]");
      }
      params.weights.push_back(
          {w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
    }
    if (j.at("n_groups").get<int>() != params.n_groups()) {
      throw Error(ErrorCode::kFormatError, "n_groups does not match weights");
    }
    params.threshold = j.at("threshold").get<double>();
    params.normalize_include_eos = j.at("normalize_include_eos").get<bool>();
    if (j.contains("fit_config")) {
      const auto& f = j["fit_config"];
      params.fit_config.l2_lambda = f.value("l2_lambda", params.fit_config.l2_lambda);
      params.fit_config.max_iters = f.value("max_iters", params.fit_config.max_iters);
      params.fit_config.tol = f.value("tol", params.fit_config.tol);
      params.fit_config.min_points_per_bucket =
          f.value("min_points_per_bucket", params.fit_config.min_points_per_bucket);
      params.fit_config.min_positive_per_bucket = f.value(
          "min_positive_per_bucket", params.fit_config.min_positive_per_bucket);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("params: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFormatError) throw;
    throw Error(ErrorCode::kFormatError, "params: " + e.message());
  }
  if (!(params.threshold >= 0.0 && params.threshold <= 1.0)) {
    throw Error(ErrorCode::kFormatError, "threshold outside [0, 1]");
  }
  if (params.mode == CalibrationMode::kNone && !params.weights.empty()) {
    throw Error(ErrorCode::kFormatError, "mode none carries no weights");
  }
  if (params.mode == CalibrationMode::kNoBias) {
    for (const auto& w : params.weights) {
      if (w.w2 != 0.0) throw Error(ErrorCode::kFormatError, "no_bias requires w2 = 0");
    }
  }
  return params;
}

void SaveParams(const CalibrationParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << ParamsToJson(params);
}

CalibrationParams LoadParams(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kMissingParams, "no params file at " + path);
  }
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParamsFromJson(buffer.str());
}

// ---------------------------------------------------------------------------
// Data collection

std::vector<TypeId> ResolveGold(const Example& example,
                                const TypeVocabulary& vocab) {
  std::vector<TypeId> gold;
  TypeId next_unknown = -1;
  for (const std::string& name : example.gold_types) {
    const auto id = vocab.Find(name);
    gold.push_back(id ? *id : next_unknown--);
  }
  return gold;
}

DecodedSet DecodeExamples(Scorer& scorer, const PrefixTrie& trie,
                          const TypeVocabulary& vocab,
                          const std::vector<Example>& examples,
                          const DecoderConfig& config) {
  DecodedSet decoded;
  decoded.candidates.reserve(examples.size());
  decoded.gold.reserve(examples.size());
  for (const Example& example : examples) {
    decoded.candidates.push_back(BeamSearch(
        scorer, trie, vocab, ScorerContext::FromExample(example), config));
    decoded.gold.push_back(ResolveGold(example, vocab));
  }
  return decoded;
}

CalibrationData LabelCandidates(const DecodedSet& decoded, int n_groups,
                                const std::function<int(TypeId)>& group_of) {
  CalibrationData data(n_groups);
  for (std::size_t i = 0; i < decoded.candidates.size(); ++i) {
    const auto& gold = decoded.gold[i];
    for (const ScoredCandidate& c : decoded.candidates[i]) {
      const bool positive = std::find(gold.begin(), gold.end(), c.type_id) != gold.end();
      const int group = group_of(c.type_id);
      if (group < 0 || group >= n_groups) {
        throw Error(ErrorCode::kMissingBucket,
                    "type " + std::to_string(c.type_id) + " maps to group " +
                        std::to_string(group) + " of " + std::to_string(n_groups));
      }
      data[group].push_back(
          {c.mean_logprob, c.bias_logprob, positive ? +1 : -1, group});
    }
  }
  return data;
}

CalibrationData CollectCalibrationData(Scorer& scorer, const PrefixTrie& trie,
                                       const TypeVocabulary& vocab,
                                       const FrequencyTable& freq,
                                       const std::vector<Example>& dev,
                                       const DecoderConfig& config,
                                       int n_groups, DecodedSet* decoded) {
  if (dev.empty()) throw Error(ErrorCode::kEmptyDevSet, "dev set is empty");
  if (n_groups < freq.num_groups()) {
    throw Error(ErrorCode::kInvalidArgument,
                "n_groups " + std::to_string(n_groups) + " < 1 + max bucket " +
                    std::to_string(freq.num_groups()));
  }
  DecodedSet local = DecodeExamples(scorer, trie, vocab, dev, config);
  CalibrationData data = LabelCandidates(
      local, n_groups, [&](TypeId t) { return freq.bucket(t); });
  if (decoded != nullptr) *decoded = std::move(local);
  return data;
}

// ---------------------------------------------------------------------------
// Fitting

CalibrationWeights FitLogisticRegression(std::span<const CalibrationPoint> points,
                                         const FitConfig& fit,
                                         bool use_bias_feature) {
  if (fit.l2_lambda < 0.0 || fit.tol <= 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "need l2_lambda >= 0 and tol > 0");
  }
  const std::size_t positives = CountPositives(points);
  const std::size_t negatives = points.size() - positives;
  if (points.empty() ||
      points.size() < static_cast<std::size_t>(fit.min_points_per_bucket) ||
      positives < static_cast<std::size_t>(fit.min_positive_per_bucket) ||
      negatives == 0) {
    throw Error(ErrorCode::kDegenerateBucket,
                std::to_string(points.size()) + " points, " +
                    std::to_string(positives) + " positive");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  const Eigen::Index d = use_bias_feature ? 2 : 1;
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = points[i].x1;
    if (use_bias_feature) x(i, 1) = points[i].x2;
    y[i] = points[i].y > 0 ? 1.0 : 0.0;
  }
  const auto result = FitLogisticIrls(x, y, fit.l2_lambda, fit.max_iters, fit.tol);
  return {result.coef[0], use_bias_feature ? result.coef[1] : 0.0,
          result.intercept};
}

int GroupOf(const CalibrationParams& params, TypeId type,
            const FrequencyTable& freq) {
  switch (params.mode) {
    case CalibrationMode::kNone:
      return -1;
    case CalibrationMode::kPerType:
      if (type < 0 || type >= params.n_groups()) {
        throw Error(ErrorCode::kMissingBucket,
                    "no per-type weights for type " + std::to_string(type));
      }
      return type;
    case CalibrationMode::kShared:
    case CalibrationMode::kBucketed:
    case CalibrationMode::kNoBias:
      if (params.n_groups() == 0) {
        throw Error(ErrorCode::kMissingBucket, "params hold no buckets");
      }
      if (params.mode == CalibrationMode::kShared) return 0;
      return std::min(freq.bucket(type), params.n_groups() - 1);
  }
  return -1;
}

double Calibrate(const CalibrationParams& params, const ScoredCandidate& cand,
                 const FrequencyTable& freq) {
  if (params.mode == CalibrationMode::kNone) return std::exp(cand.mean_logprob);
  const CalibrationWeights& w = params.weights[GroupOf(params, cand.type_id, freq)];
  return Sigmoid(w.w1 * cand.mean_logprob + w.w2 * cand.bias_logprob + w.b);
}

void CalibrateAll(const CalibrationParams& params, const FrequencyTable& freq,
                  std::vector<ScoredCandidate>& candidates) {
  for (ScoredCandidate& c : candidates) c.confidence = Calibrate(params, c, freq);
}

// ---------------------------------------------------------------------------
// Threshold search

std::vector<double> ThresholdGrid(
    const std::vector<std::vector<ScoredCandidate>>& dev) {
  std::vector<double> grid = {0.0, 1.0};
  for (const auto& candidates : dev) {
    for (const ScoredCandidate& c : candidates) grid.push_back(c.confidence.value());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

struct Flattened {
  std::vector<std::vector<std::pair<double, bool>>> examples;
  std::vector<std::int64_t> gold_sizes;
};

Flattened Flatten(const std::vector<std::vector<ScoredCandidate>>& dev,
                  const std::vector<std::vector<TypeId>>& gold) {
  if (dev.size() != gold.size()) {
    throw Error(ErrorCode::kInvalidArgument, "dev/gold size mismatch");
  }
  Flattened flat;
  flat.examples.resize(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    std::vector<TypeId> g = gold[i];
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    flat.gold_sizes.push_back(static_cast<std::int64_t>(g.size()));
    for (const ScoredCandidate& c : dev[i]) {
      flat.examples[i].emplace_back(
          c.confidence.value(), std::binary_search(g.begin(), g.end(), c.type_id));
    }
  }
  return flat;
}

double F1At(const Flattened& flat, double threshold,
            std::vector<PrfCounts>& counts) {
  counts.resize(flat.examples.size());
  for (std::size_t i = 0; i < flat.examples.size(); ++i) {
    PrfCounts& c = counts[i];
    c = {0, 0, flat.gold_sizes[i]};
    for (const auto& [confidence, is_gold] : flat.examples[i]) {
      if (confidence >= threshold) {
        ++c.predicted;
        if (is_gold) ++c.true_positive;
      }
    }
  }
  return MacroPrfFromCounts(counts).f1;
}

}  // namespace

double ThresholdF1(const std::vector<std::vector<ScoredCandidate>>& dev,
                   const std::vector<std::vector<TypeId>>& gold,
                   double threshold) {
  std::vector<PrfCounts> counts;
  return F1At(Flatten(dev, gold), threshold, counts);
}

double SelectThreshold(const std::vector<std::vector<ScoredCandidate>>& dev,
                       const std::vector<std::vector<TypeId>>& gold) {
  const Flattened flat = Flatten(dev, gold);
  std::vector<PrfCounts> counts;
  double best_threshold = 0.0;
  double best_f1 = -1.0;
  for (double threshold : ThresholdGrid(dev)) {
    const double f1 = F1At(flat, threshold, counts);
    if (f1 >= best_f1) {
      best_f1 = f1;
      best_threshold = threshold;
    }
  }
  return best_threshold;
}

// ---------------------------------------------------------------------------
// Modes

CalibrationRun FitCalibration(Scorer& scorer, const PrefixTrie& trie,
                              const TypeVocabulary& vocab,
                              const FrequencyTable& freq,
                              const std::vector<Example>& dev,
                              const CalibrationConfig& config) {
  if (dev.empty()) throw Error(ErrorCode::kEmptyDevSet, "dev set is empty");
  CalibrationRun run;
  run.params = BaseParams(config.mode, config.decoder, config.fit);

  switch (config.mode) {
    case CalibrationMode::kNone:
      run.dev = DecodeExamples(scorer, trie, vocab, dev, config.decoder);
      break;
    case CalibrationMode::kPerType: {
      const std::size_t pairs = vocab.size() * dev.size();
      if (pairs > config.per_type_budget) {
        throw Error(ErrorCode::kBudgetExceeded,
                    std::to_string(vocab.size()) + " types x " +
                        std::to_string(dev.size()) + " examples = " +
                        std::to_string(pairs) + " pairs exceeds budget " +
                        std::to_string(config.per_type_budget));
      }
      CalibrationData data(vocab.size());
      for (const Example& example : dev) {
        const std::vector<TypeId> gold = ResolveGold(example, vocab);
        for (const ScoredCandidate& c :
             ScoreAllTypes(scorer, vocab, ScorerContext::FromExample(example),
                           config.decoder.scoring())) {
          const bool positive =
              std::find(gold.begin(), gold.end(), c.type_id) != gold.end();
          data[c.type_id].push_back(
              {c.mean_logprob, c.bias_logprob, positive ? +1 : -1, c.type_id});
        }
      }
      GroupFit fit = FitGroups(data, config.fit, true, Fallback::kGlobalOnly);
      run.params.weights = std::move(fit.weights);
      run.groups = std::move(fit.groups);
      run.dev = DecodeExamples(scorer, trie, vocab, dev, config.decoder);
      break;
    }
    case CalibrationMode::kBucketed:
    case CalibrationMode::kShared:
    case CalibrationMode::kNoBias: {
      const bool shared = config.mode == CalibrationMode::kShared;
      const int n_groups = shared ? 1 : freq.num_groups();
      run.dev = DecodeExamples(scorer, trie, vocab, dev, config.decoder);
      const CalibrationData data =
          LabelCandidates(run.dev, n_groups, [&](TypeId t) {
            return shared ? 0 : freq.bucket(t);
          });
      GroupFit fit = FitGroups(data, config.fit,
                               config.mode != CalibrationMode::kNoBias,
                               Fallback::kNearestLower);
      run.params.weights = std::move(fit.weights);
      run.groups = std::move(fit.groups);
      break;
    }
  }

  for (auto& candidates : run.dev.candidates) {
    CalibrateAll(run.params, freq, candidates);
  }
  run.params.threshold = SelectThreshold(run.dev.candidates, run.dev.gold);
  run.dev_f1 = ThresholdF1(run.dev.candidates, run.dev.gold, run.params.threshold);
  return run;
}

CalibrationParams FitBucketed(Scorer& scorer, const PrefixTrie& trie,
                              const TypeVocabulary& vocab,
                              const FrequencyTable& freq,
                              const std::vector<Example>& dev,
                              const CalibrationConfig& config) {
  if (config.mode != CalibrationMode::kBucketed &&
      config.mode != CalibrationMode::kShared &&
      config.mode != CalibrationMode::kNoBias) {
    throw Error(ErrorCode::kInvalidArgument,
                "FitBucketed does not handle mode " + std::string(ModeName(config.mode)));
  }
  return FitCalibration(scorer, trie, vocab, freq, dev, config).params;
}

CalibrationParams FitFullPerType(Scorer& scorer, const PrefixTrie& trie,
                                 const TypeVocabulary& vocab,
                                 const std::vector<Example>& dev,
                                 const DecoderConfig& decoder,
                                 const FitConfig& fit, std::size_t budget) {
  CalibrationConfig config;
  config.mode = CalibrationMode::kPerType;
  config.decoder = decoder;
  config.fit = fit;
  config.per_type_budget = budget;
  return FitCalibration(scorer, trie, vocab, FrequencyTable(), dev, config).params;
}

// ---------------------------------------------------------------------------
// Inference

Prediction ApplyThreshold(const CalibrationParams& params,
                          std::vector<ScoredCandidate> calibrated) {
  Prediction prediction;
  for (const ScoredCandidate& c : calibrated) {
    if (c.confidence.value() >= params.threshold) prediction.types.push_back(c);
  }
  std::sort(prediction.types.begin(), prediction.types.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (*a.confidence != *b.confidence) return *a.confidence > *b.confidence;
              return a.type_id < b.type_id;
            });
  prediction.candidates = std::move(calibrated);
  return prediction;
}

Prediction Predict(Scorer& scorer, const PrefixTrie& trie,
                   const TypeVocabulary& vocab, const CalibrationParams& params,
                   const FrequencyTable& freq, const ScorerContext& context,
                   const DecoderConfig& config) {
  std::vector<ScoredCandidate> candidates =
      BeamSearch(scorer, trie, vocab, context, config);
  CalibrateAll(params, freq, candidates);
  return ApplyThreshold(params, std::move(candidates));
}

ScoredCandidate PredictSingleLabel(Scorer& scorer, const TypeVocabulary& vocab,
                                   const CalibrationParams& params,
                                   const FrequencyTable& freq,
                                   const ScorerContext& context) {
  std::vector<ScoredCandidate> all = ScoreAllTypes(
      scorer, vocab, context, {params.normalize_include_eos});
  CalibrateAll(params, freq, all);
  const auto best = std::min_element(
      all.begin(), all.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (*a.confidence != *b.confidence) return *a.confidence > *b.confidence;
        return a.type_id < b.type_id;
      });
  return *best;
}

}  // namespace typecal
