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

#include "legit/evaluation.h"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/utf8.h"
#include "test_world.h"

namespace legit {
namespace {

using testing::Fixture;
using testing::TheWorld;

const LegitDataset& Synth() {
  static const LegitDataset* ds = new LegitDataset(IngestLegit(Fixture("synth_annotations.jsonl")));
  return *ds;
}

PairAnnotation Pair(int i, Label label, double n1, double n2, Split split) {
  PairAnnotation p;
  p.pair_id = "p" + std::to_string(i);
  p.word = "word";
  p.w1 = p.w2 = "word";
  p.phi1 = PerturbParams{n1, 5, "imgdot"};
  p.phi2 = PerturbParams{n2, 5, "imgdot"};
  p.label = label;
  p.split = split;
  return p;
}

TEST(MajorityModelTest, HardSubsetUsesItsOwnMajority) {
  std::vector<PairAnnotation> a;
  // Overall legible majority; hard (n > 0.4) examples mostly illegible.
  for (int i = 0; i < 6; ++i) a.push_back(Pair(i, Label::kBL, 0.1, 0.2, Split::kTrain));
  for (int i = 6; i < 9; ++i) a.push_back(Pair(i, Label::kNL, 0.8, 0.9, Split::kTrain));
  a.push_back(Pair(9, Label::kL1, 0.5, 0.6, Split::kTest));
  a.push_back(Pair(10, Label::kNL, 0.7, 0.9, Split::kTest));
  a.push_back(Pair(11, Label::kBL, 0.1, 0.9, Split::kTest));
  const LegitDataset ds = BuildDataset(a);
  auto m = MakeMajorityModel();
  m->Fit(ds);
  const TaskMetrics t = EvaluateModel(*m, ds, Split::kTest);
  // test classification: 5 examples, 3 legible; all predicted legible.
  EXPECT_DOUBLE_EQ(t.classification->accuracy, 0.6);
  EXPECT_DOUBLE_EQ(t.classification->recall, 1.0);
  // hard: w1 of p9 (legible), both of p10, w2 of p11 (legible); all predicted illegible.
  EXPECT_EQ(t.classification_hard->count, 4u);
  EXPECT_DOUBLE_EQ(t.classification_hard->accuracy, 0.5);
  EXPECT_EQ(t.classification_hard->f1, 0.0);
  EXPECT_EQ(*t.ranking, 0.0);  // only p9 ranks, preferring w1
}

TEST(LogRegModelTest, LearnsFromParameters) {
  auto m = MakeLogRegModel();
  m->Fit(Synth());
  const TaskMetrics t = EvaluateModel(*m, Synth(), Split::kVal);
  EXPECT_GT(t.classification->accuracy, 0.7);
  EXPECT_GT(*t.ranking, 0.6);
  auto with_model = MakeLogRegModel(true);
  with_model->Fit(Synth());
  EXPECT_EQ(with_model->name(), "baseline:logreg");
}

TEST(DistanceModelTest, RecoversSyntheticLabelRule) {
  // Synthetic labels are a threshold on the same distance, so a fitted
  // threshold separates them almost perfectly.
  auto m = MakeDistanceModel("imgdot", TheWorld().imgdot);
  m->Fit(Synth());
  const TaskMetrics t = EvaluateModel(*m, Synth(), Split::kTest);
  EXPECT_GT(t.classification->accuracy, 0.97);
  EXPECT_GT(*t.ranking, 0.97);
}

TEST(ScorerModelTest, FixtureScorerIsAccurate) {
  const auto& w = TheWorld();
  const LegibilityScorer scorer = LegibilityScorer::Load(Fixture("scorer.json"));
  const FeatureExtractor fx(w.imgdot, &w.ascii);
  auto m = MakeScorerModel(scorer, fx);
  const TaskMetrics t = EvaluateModel(*m, Synth(), Split::kTest, EvalTask::kClassification);
  EXPECT_GT(t.classification->f1, 0.95);
  EXPECT_FALSE(t.ranking);
  const nlohmann::json j = ToJson(t);
  EXPECT_TRUE(j.contains("classification"));
  EXPECT_FALSE(j.contains("ranking"));
}

TEST(MakeTrainExamplesTest, OnePerPair) {
  const auto& w = TheWorld();
  const FeatureExtractor fx(w.imgdot, &w.ascii);
  const auto ex = MakeTrainExamples(Synth(), Split::kVal, fx);
  EXPECT_EQ(ex.size(), Synth().splits[1].pairs);
  EXPECT_EQ(ex[0].x1.size(), 8u);
}

TEST(SynthesizeTest, LabelsFollowThreshold) {
  const auto& w = TheWorld();
  SynthConfig cfg;
  cfg.threshold = 0.05;
  cfg.pairs_per_word = 2;
  const std::vector<std::string> vocab = {"apple", "banana", "cherry", "damson", "elder"};
  const auto a = SynthesizeAnnotations(vocab, {{"imgdot", &w.ascii}}, w.imgdot, cfg);
  ASSERT_EQ(a.size(), 10u);
  for (const auto& p : a) {
    const auto word = DecodeUtf8(p.word);
    const bool l1 = MeanCharDistance(w.imgdot, word, DecodeUtf8(p.w1)) < 0.05;
    const bool l2 = MeanCharDistance(w.imgdot, word, DecodeUtf8(p.w2)) < 0.05;
    const Label want = l1 && l2 ? Label::kBL : !l1 && !l2 ? Label::kNL : l1 ? Label::kL1 : Label::kL2;
    EXPECT_EQ(p.label, want);
  }
  EXPECT_EQ(SynthesizeAnnotations(vocab, {{"imgdot", &w.ascii}}, w.imgdot, cfg), a);
  EXPECT_TRUE(SplitViolations(a).empty());
}

}  // namespace
}  // namespace legit
