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

#include "legit/scorer.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "test_world.h"

namespace legit {
namespace {

using testing::Fixture;
using testing::TheWorld;

class LinearDistance : public CharDistance {
 public:
  std::string_view model_id() const override { return "linear"; }
  double Distance(char32_t a, char32_t b) const override {
    return a == b ? 0.0 : std::abs(static_cast<double>(a) - b) / 100.0;
  }
  bool Covers(char32_t) const override { return true; }
};

// Reference values computed with mpmath.
TEST(LossTest, MatchesReference) {
  EXPECT_NEAR(LossClassify(1.3, 1), 0.241008453832992, 1e-14);
  EXPECT_NEAR(LossClassify(-2.0, 0), 0.12692801104297, 1e-13);
  EXPECT_NEAR(LossClassify(2.0, 0), 2.12692801104297, 1e-13);
  EXPECT_NEAR(LossContrastive(2.0, 0.5, 0), 0.201413277982752, 1e-14);
  EXPECT_NEAR(LossContrastive(0.7, -0.4, 1), 1.38733532511543, 1e-13);
  EXPECT_NEAR(Sigmoid(0.0), 0.5, 0.0);
  EXPECT_NEAR(LogSigmoid(0.0), -std::log(2.0), 1e-15);
}

TEST(LossTest, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(LossClassify(1000.0, 0), 1000.0);
  EXPECT_EQ(LossClassify(1000.0, 1), 0.0);
  EXPECT_DOUBLE_EQ(LossContrastive(-500.0, 500.0, 0), 1000.0);
  EXPECT_EQ(Sigmoid(-1000.0), 0.0);
  EXPECT_EQ(Sigmoid(1000.0), 1.0);
}

TEST(LossTest, MultitaskComposition) {
  const double s1 = 0.8, s2 = -0.3;
  EXPECT_DOUBLE_EQ(LossMultitask(s1, s2, Label::kL1),
                   LossClassify(s1, 1) + LossContrastive(s1, s2, 0));
  EXPECT_DOUBLE_EQ(LossMultitask(s1, s2, Label::kL2),
                   LossClassify(s2, 1) + LossContrastive(s1, s2, 1));
  EXPECT_DOUBLE_EQ(LossMultitask(s1, s2, Label::kBL),
                   LossClassify(s1, 1) + LossClassify(s2, 1));
  EXPECT_DOUBLE_EQ(LossMultitask(s1, s2, Label::kNL),
                   LossClassify(s1, 0) + LossClassify(s2, 0));
}

TEST(LossTest, GradientMatchesFiniteDifference) {
  const double h = 1e-6;
  for (Label l : {Label::kL1, Label::kL2, Label::kBL, Label::kNL}) {
    for (auto [s1, s2] : {std::pair{0.3, -1.2}, std::pair{-2.0, 2.5}, std::pair{4.0, 4.0}}) {
      const LossGrad g = MultitaskLossGrad(s1, s2, l);
      EXPECT_NEAR(g.d_s1,
                  (LossMultitask(s1 + h, s2, l) - LossMultitask(s1 - h, s2, l)) / (2 * h),
                  1e-8);
      EXPECT_NEAR(g.d_s2,
                  (LossMultitask(s1, s2 + h, l) - LossMultitask(s1, s2 - h, l)) / (2 * h),
                  1e-8);
    }
  }
}

TEST(FeatureTest, HandComputed) {
  const LinearDistance dist;
  const FeatureExtractor fx(dist, nullptr);
  EXPECT_EQ(fx.config().dim(), 7u);
  // "abcde" -> "axcdz": b->x (22), e->z (21) at positions 1 and 4.
  const auto f = fx.Extract(U"abcde", U"axcdz");
  ASSERT_EQ(f.size(), 7u);
  EXPECT_DOUBLE_EQ(f[kMeanDistance], (0.22 + 0.21) / 5);
  EXPECT_DOUBLE_EQ(f[kMaxDistance], 0.22);
  EXPECT_DOUBLE_EQ(f[kMinReplacedDistance], 0.21);
  EXPECT_DOUBLE_EQ(f[kFractionReplaced], 0.4);
  EXPECT_DOUBLE_EQ(f[kLengthNorm], 5.0 / 14.0);
  EXPECT_DOUBLE_EQ(f[kPositionMean], (0.25 + 1.0) / 2);
  EXPECT_DOUBLE_EQ(f[kPositionVariance], 0.375 * 0.375);
}

TEST(FeatureTest, UnchangedWordAndErrors) {
  const LinearDistance dist;
  const FeatureExtractor fx(dist, nullptr, &dist);
  EXPECT_EQ(fx.config().dim(), 9u);
  const auto f = fx.Extract(U"word", U"word");
  for (size_t i = 0; i < f.size(); ++i) {
    if (i != kLengthNorm) EXPECT_EQ(f[i], 0.0) << i;
  }
  EXPECT_THROW(fx.Extract(U"word", U"wor"), Error);
  EXPECT_THROW(fx.Extract(U"", U""), Error);
}

TEST(FeatureTest, Rank1CountUsesTable) {
  const auto& w = TheWorld();
  const FeatureExtractor fx(w.imgdot, &w.ascii);
  ASSERT_EQ(fx.config().dim(), 8u);
  ASSERT_EQ(fx.config().Names().back(), "rank1_count");
  std::u32string wi = U"cat";
  wi[0] = w.ascii.KthNeighbor(U'c', 1);
  wi[2] = w.ascii.KthNeighbor(U't', 2);
  const auto f = fx.Extract(U"cat", wi);
  EXPECT_EQ(f[kRank1Count], 1.0);
  EXPECT_NEAR(f[kMaxDistance], w.ascii.Kth(U't', 2).distance, 1e-12);
}

TEST(ModelTest, LinearScoreIsAffine) {
  LegibilityScorer m = LegibilityScorer::Linear(FeatureConfig{false, false});
  ASSERT_EQ(m.params().size(), 8u);
  for (size_t i = 0; i < 8; ++i) m.mutable_params()[i] = 0.5 * (i + 1);
  m.SetStandardization(std::vector<double>(7, 1.0), std::vector<double>(7, 2.0));
  const std::vector<double> x = {3, 1, 1, 1, 1, 1, 5};
  // (3-1)/2 * 0.5 + (5-1)/2 * 3.5 + 4.0
  EXPECT_DOUBLE_EQ(m.Score(x), 0.5 + 7.0 + 4.0);
  EXPECT_THROW(m.Score(std::vector<double>(3, 0.0)), Error);
  EXPECT_THROW(m.SetStandardization(std::vector<double>(7, 0.0), std::vector<double>(7, 0.0)),
               Error);
  EXPECT_TRUE(m.IsWeight(6));
  EXPECT_FALSE(m.IsWeight(7));
}

TEST(ModelTest, MlpGradCheck) {
  const LegibilityScorer m = LegibilityScorer::Mlp(FeatureConfig{}, 6, 0.0, 3);
  ASSERT_EQ(m.params().size(), 6u * 8 + 6 + 6 + 1);
  Rng rng(4);
  for (Label l : {Label::kL1, Label::kL2, Label::kBL, Label::kNL}) {
    TrainExample ex;
    for (int i = 0; i < 8; ++i) {
      ex.x1.push_back(StandardNormal(rng));
      ex.x2.push_back(StandardNormal(rng));
    }
    ex.label = l;
    EXPECT_LT(GradCheck(m, ex), 1e-6);
    EXPECT_LT(GradCheckClassify(m, ex.x1, 1), 1e-6);
  }
  EXPECT_THROW(LegibilityScorer::Mlp(FeatureConfig{}, 0, 0.0, 1), Error);
  EXPECT_THROW(LegibilityScorer::Mlp(FeatureConfig{}, 4, 1.0, 1), Error);
}

TEST(ModelTest, DropoutOnlyInTraining) {
  const LegibilityScorer m = LegibilityScorer::Mlp(FeatureConfig{}, 32, 0.5, 1);
  const std::vector<double> x(8, 0.3);
  Rng rng(1);
  const auto t = m.Forward(x, &rng);
  int dropped = 0;
  for (double k : t.mask) {
    EXPECT_TRUE(k == 0.0 || k == 2.0);
    dropped += k == 0.0;
  }
  EXPECT_GT(dropped, 0);
  EXPECT_EQ(m.Forward(x, nullptr).score, m.Score(x));
}

TEST(ModelTest, SaveLoadRoundTrip) {
  LegibilityScorer m = LegibilityScorer::Mlp(FeatureConfig{true, true}, 5, 0.1, 9);
  m.SetStandardization(std::vector<double>(10, 0.25), std::vector<double>(10, 3.0));
  const std::string path =
      (std::filesystem::temp_directory_path() / "legit_scorer_test.json").string();
  m.Save(path);
  EXPECT_EQ(LegibilityScorer::Load(path), m);
  std::filesystem::remove(path);

  nlohmann::json j = m.ToJson();
  j["params"].erase(0);
  EXPECT_THROW(LegibilityScorer::FromJson(j), Error);
  j = m.ToJson();
  j["version"] = 2;
  EXPECT_THROW(LegibilityScorer::FromJson(j), Error);
  j = m.ToJson();
  j.erase("kind");
  EXPECT_THROW(LegibilityScorer::FromJson(j), Error);
}

TEST(ModelTest, FixtureLoads) {
  const LegibilityScorer m = LegibilityScorer::Load(Fixture("scorer.json"));
  EXPECT_EQ(m.input_dim(), m.features().dim());
  for (double p : m.params()) EXPECT_TRUE(std::isfinite(p));
}

std::vector<TrainExample> ToyExamples(size_t count, uint64_t seed) {
  // Legible iff feature 0 is small.
  Rng rng(seed);
  std::vector<TrainExample> out;
  for (size_t i = 0; i < count; ++i) {
    TrainExample ex;
    for (int j = 0; j < 8; ++j) {
      ex.x1.push_back(UniformUnit(rng));
      ex.x2.push_back(UniformUnit(rng));
    }
    const bool l1 = ex.x1[0] < 0.5, l2 = ex.x2[0] < 0.5;
    if (l1 && l2) {
      ex.label = Label::kBL;
    } else if (!l1 && !l2) {
      ex.label = Label::kNL;
    } else {
      ex.label = l1 ? Label::kL1 : Label::kL2;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

TEST(TrainTest, LearnsAndIsDeterministic) {
  const auto train = ToyExamples(400, 1);
  const auto val = ToyExamples(100, 2);
  TrainConfig cfg;
  cfg.max_epochs = 30;
  LegibilityScorer a = LegibilityScorer::Mlp(FeatureConfig{}, 8, 0.1, 5);
  const double before = MeanMultitaskLoss(a, val);
  const TrainHistory h = Train(a, train, val, cfg);
  EXPECT_GT(h.best_epoch, 0u);
  EXPECT_LT(h.best_val_loss, 0.5 * before);
  EXPECT_DOUBLE_EQ(MeanMultitaskLoss(a, val), h.best_val_loss);

  int correct = 0;
  for (const auto& ex : val) correct += ClassifyScore(a.Score(ex.x1)) == (ex.x1[0] < 0.5);
  EXPECT_GT(correct, 90);

  LegibilityScorer b = LegibilityScorer::Mlp(FeatureConfig{}, 8, 0.1, 5);
  Train(b, train, val, cfg);
  EXPECT_EQ(a, b);
}

TEST(TrainTest, RejectsBadConfig) {
  LegibilityScorer m = LegibilityScorer::Linear(FeatureConfig{});
  const auto ex = ToyExamples(4, 1);
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(Train(m, ex, ex, cfg), Error);
  EXPECT_THROW(Train(m, ex, {}, TrainConfig{}), Error);
}

TEST(TrainTest, DivergenceIsReported) {
  auto ex = ToyExamples(16, 1);
  ex[3].x1[2] = std::nan("");
  LegibilityScorer m = LegibilityScorer::Linear(FeatureConfig{});
  TrainConfig cfg;
  cfg.standardize = false;
  try {
    Train(m, ex, ex, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
  }
}

}  // namespace
}  // namespace legit
