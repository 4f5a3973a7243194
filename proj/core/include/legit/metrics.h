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

#ifndef LEGIT_METRICS_H_
#define LEGIT_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace legit {

// Binary metrics with "legible" as the positive class. Precision, recall
// and F1 are 0 when their denominators are 0.
struct ClassificationMetrics {
  size_t count = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ClassificationMetrics ComputeClassificationMetrics(const std::vector<bool>& truth,
                                                   const std::vector<bool>& predicted);

// Fraction of positions where predicted == truth. 0 for empty input.
double RankingAccuracy(std::span<const int> truth, std::span<const int> predicted);

// Area under the ROC curve with average ranks for ties. Returns 0.5 when
// only one class is present.
double RocAuc(std::span<const double> scores, const std::vector<bool>& labels);

nlohmann::json ToJson(const ClassificationMetrics& metrics);

}  // namespace legit

#endif  // LEGIT_METRICS_H_
