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

#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"

namespace legit {
namespace {

// Reference values from scikit-learn.
TEST(MetricsTest, ClassificationMatchesReference) {
  const std::vector<bool> truth = {1, 0, 1, 1, 0, 1, 0, 0, 1, 1};
  const std::vector<bool> pred = {1, 1, 1, 0, 0, 1, 0, 1, 1, 0};
  const ClassificationMetrics m = ComputeClassificationMetrics(truth, pred);
  EXPECT_EQ(m.count, 10u);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
}

TEST(MetricsTest, NoPositivePredictionsGiveZeroF1) {
  const ClassificationMetrics m =
      ComputeClassificationMetrics({true, false, true}, {false, false, false});
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0 / 3.0);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_EQ(ComputeClassificationMetrics({}, {}).count, 0u);
  EXPECT_THROW(ComputeClassificationMetrics({true}, {}), Error);
}

TEST(MetricsTest, MajorityLegibleOnBalancedSet) {
  std::vector<bool> truth(1000, false);
  for (int i = 0; i < 512; ++i) truth[i] = true;
  const ClassificationMetrics m =
      ComputeClassificationMetrics(truth, std::vector<bool>(1000, true));
  EXPECT_NEAR(m.accuracy, 0.512, 1e-12);
  EXPECT_NEAR(m.recall, 1.0, 1e-12);
  EXPECT_NEAR(m.f1, 0.677, 0.0005);
}

TEST(MetricsTest, RankingAccuracy) {
  const std::vector<int> truth = {1, 2, 2, 1};
  const std::vector<int> pred = {1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(RankingAccuracy(truth, pred), 0.5);
  EXPECT_EQ(RankingAccuracy(std::vector<int>{}, std::vector<int>{}), 0.0);
}

TEST(MetricsTest, AucWithTiesMatchesReference) {
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8, 0.35, 0.2, 0.9, 0.5};
  const std::vector<bool> y = {0, 0, 1, 1, 0, 1, 1, 0};
  EXPECT_DOUBLE_EQ(RocAuc(s, y), 0.65625);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{1, 2, 3}, {false, true, true}), 1.0);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{1, 2, 3}, {true, false, false}), 1.0 - 1.0);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{1, 2}, {true, true}), 0.5);
}

TEST(MetricsTest, Json) {
  const nlohmann::json j = ToJson(ComputeClassificationMetrics({true}, {true}));
  EXPECT_EQ(j.at("f1"), 1.0);
  EXPECT_EQ(j.at("count"), 1);
}

}  // namespace
}  // namespace legit
