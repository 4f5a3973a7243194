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

#include "legit/baselines.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "test_world.h"

namespace legit {
namespace {

using testing::TheWorld;

TEST(MajorityTest, PicksMoreFrequentClass) {
  std::vector<ClassificationExample> ex(5);
  ex[0].legible = ex[1].legible = true;
  EXPECT_FALSE(MajorityClass::Fit(ex).PredictLegible());
  ex[2].legible = true;
  EXPECT_TRUE(MajorityClass::Fit(ex).PredictLegible());
  EXPECT_EQ(MajorityClass::PredictRanking(), 2);
}

const std::vector<std::vector<double>> kX = {
    {0.1, 3}, {0.4, 1}, {0.35, 2}, {0.8, 5}, {0.5, 4},  {0.2, 2},
    {0.9, 1}, {0.6, 3}, {0.3, 4},  {0.7, 2}, {0.45, 5}, {0.15, 1}};
const std::vector<bool> kY = {1, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0, 1};

// Reference: scikit-learn LogisticRegression(penalty=None) on the same
// standardized features.
TEST(LogRegTest, MatchesReference) {
  LogRegConfig tight;
  tight.tolerance = 1e-11;
  const LogisticRegression m = LogisticRegression::Fit(kX, kY, tight);
  EXPECT_TRUE(m.converged());
  ASSERT_EQ(m.params().size(), 3u);
  EXPECT_NEAR(m.params()[0], -2.9015079, 1e-5);
  EXPECT_NEAR(m.params()[1], -0.11607444, 1e-5);
  EXPECT_NEAR(m.params()[2], -0.21200239, 1e-5);
  EXPECT_NEAR(m.Probability(std::vector<double>{0.5, 3}), 0.3155138527398897, 1e-6);
  EXPECT_NEAR(m.Probability(std::vector<double>{0.1, 1}), 0.9840066548367552, 1e-6);
  EXPECT_NEAR(m.Probability(std::vector<double>{0.9, 5}), 0.0034415302904844754, 1e-6);
  EXPECT_FALSE(m.Predict(std::vector<double>{0.5, 3}));
  EXPECT_THROW(m.Probability(std::vector<double>{0.5}), Error);
  EXPECT_EQ(m.ToJson().at("params").size(), 3u);

  const LogisticRegression loose = LogisticRegression::Fit(kX, kY);
  EXPECT_TRUE(loose.converged());
  EXPECT_LT(loose.iterations(), m.iterations());
  EXPECT_NEAR(loose.Probability(std::vector<double>{0.5, 3}), 0.3155138527398897, 1e-4);
}

TEST(LogRegTest, GradientMatchesFiniteDifference) {
  const std::vector<double> p = {0.3, -0.2, 0.1};
  const auto g = LogisticGradient(p, kX, kY);
  const double h = 1e-6;
  for (size_t i = 0; i < p.size(); ++i) {
    auto up = p, down = p;
    up[i] += h;
    down[i] -= h;
    EXPECT_NEAR(g[i], (LogisticLoss(up, kX, kY) - LogisticLoss(down, kX, kY)) / (2 * h), 1e-8);
  }
}

TEST(LogRegTest, Errors) {
  try {
    LogisticRegression::Fit(kX, std::vector<bool>(kX.size(), true));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleClass);
  }
  EXPECT_THROW(LogisticRegression::Fit({}, {}), Error);
  EXPECT_THROW(LogisticRegression::Fit({{1.0}, {1.0, 2.0}}, {true, false}), Error);
}

TEST(PhiFeaturesTest, Layout) {
  const PerturbParams a{0.25, 7, "imgdot"}, b{0.5, 3, "other"};
  EXPECT_EQ(PhiFeatures(a), (std::vector<double>{0.25, 7}));
  EXPECT_EQ(PhiFeatures(a, {"imgdot", "other"}), (std::vector<double>{0.25, 7, 1, 0}));
  EXPECT_EQ(RankingPhiFeatures(a, b, {"imgdot", "other"}),
            (std::vector<double>{0.25, 7, 0.5, 3, 1, 0, 0, 1}));
}

TEST(DistanceBaselineTest, MeanAndRank) {
  const auto& w = TheWorld();
  std::u32string near = U"dog", far = U"dog";
  near[1] = w.ascii.KthNeighbor(U'o', 1);
  far[1] = w.ascii.KthNeighbor(U'o', 90);
  EXPECT_DOUBLE_EQ(MeanCharDistance(w.imgdot, U"dog", near), w.ascii.Kth(U'o', 1).distance / 3);
  EXPECT_EQ(MeanCharDistance(w.imgdot, U"dog", U"dog"), 0.0);
  EXPECT_EQ(RankByDistance(w.imgdot, U"dog", near, far), 1);
  EXPECT_EQ(RankByDistance(w.imgdot, U"dog", far, near), 2);
  EXPECT_EQ(RankByDistance(w.imgdot, U"dog", near, near), 1);
  EXPECT_THROW(MeanCharDistance(w.imgdot, U"dog", U"do"), Error);
}

TEST(ThresholdTest, MaximizesTrainingF1) {
  const std::vector<double> s = {0.7, 0.5, 0.2, 0.9, 0.5};
  const ThresholdClassifier c = ThresholdClassifier::Fit(s, {true, true, false, true, false});
  EXPECT_DOUBLE_EQ(c.threshold(), 0.35);
  EXPECT_TRUE(c.Predict(0.35));
  EXPECT_FALSE(c.Predict(0.34));
}

TEST(ThresholdTest, TiesPreferSmallestThreshold) {
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.4};
  EXPECT_DOUBLE_EQ(ThresholdClassifier::Fit(s, {true, false, false, true}).threshold(), 0.1);
  EXPECT_DOUBLE_EQ(ThresholdClassifier::Fit(s, {false, false, false, false}).threshold(), 0.1);
  EXPECT_THROW(ThresholdClassifier::Fit(std::vector<double>{}, {}), Error);
}

}  // namespace
}  // namespace legit
