// Copyright 2026 The LEGIT Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "legit/metrics.h"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "legit/error.h"

namespace legit {

ClassificationMetrics ComputeClassificationMetrics(const std::vector<bool>& truth,
                                                   const std::vector<bool>& predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument, "metric inputs differ in length");
  }
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i]) {
      truth[i] ? ++tp : ++fp;
    } else {
      truth[i] ? ++fn : ++tn;
    }
  }
  ClassificationMetrics m;
  m.count = truth.size();
  if (m.count == 0) return m;
  m.accuracy = static_cast<double>(tp + tn) / m.count;
  m.precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double RankingAccuracy(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument, "metric inputs differ in length");
  }
  if (truth.empty()) return 0.0;
  size_t hit = 0;
  for (size_t i = 0; i < truth.size(); ++i) hit += truth[i] == predicted[i];
  return static_cast<double>(hit) / truth.size();
}

double RocAuc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "metric inputs differ in length");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (size_t t = i; t < j; ++t) rank[order[t]] = avg;
    i = j;
  }
  double pos = 0, neg = 0, rank_sum = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      ++pos;
      rank_sum += rank[i];
    } else {
      ++neg;
    }
  }
  if (pos == 0 || neg == 0) return 0.5;
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

nlohmann::json ToJson(const ClassificationMetrics& m) {
  return {{"count", m.count},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1}};
}

}  // namespace legit
