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

#include "legit/dataset.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/image_io.h"
#include "test_world.h"

namespace legit {
namespace {

using testing::Fixture;

PairAnnotation Pair(const std::string& id, Label label, double n1 = 0.5,
                    double n2 = 0.5, Split split = Split::kTrain,
                    const std::string& annotator = "") {
  PairAnnotation p;
  p.pair_id = id;
  p.word = "word" + id;
  p.w1 = p.word + "1";
  p.w2 = p.word + "2";
  p.phi1 = PerturbParams{n1, 3, "imgdot"};
  p.phi2 = PerturbParams{n2, 9, "imgdot"};
  p.label = label;
  p.split = split;
  p.annotator = annotator;
  return p;
}

TEST(LabelTest, NamesRoundTrip) {
  for (Label l : {Label::kL1, Label::kL2, Label::kBL, Label::kNL}) {
    EXPECT_EQ(ParseLabel(LabelName(l)), l);
  }
  EXPECT_THROW(ParseLabel("l1"), Error);
  EXPECT_EQ(ParseSplit("validation"), Split::kVal);
  EXPECT_EQ(ParseSplit("valid"), Split::kVal);
  EXPECT_THROW(ParseSplit("dev"), Error);
}

TEST(DeriveTest, ClassificationFollowsLabel) {
  const std::vector<PairAnnotation> pairs = {Pair("a", Label::kL1), Pair("b", Label::kL2),
                                             Pair("c", Label::kBL), Pair("d", Label::kNL)};
  const auto ex = DeriveClassification(pairs);
  ASSERT_EQ(ex.size(), 6u);
  EXPECT_EQ(ex[0].perturbed, "worda1");
  EXPECT_TRUE(ex[0].legible);
  EXPECT_EQ(ex[1].perturbed, "wordb2");
  EXPECT_TRUE(ex[1].legible);
  EXPECT_TRUE(ex[2].legible && ex[3].legible);
  EXPECT_FALSE(ex[4].legible || ex[5].legible);
  EXPECT_EQ(ex[5].phi->k, 9);
}

TEST(DeriveTest, RankingKeepsOnlyStrictPreferences) {
  const std::vector<PairAnnotation> pairs = {Pair("a", Label::kL1), Pair("b", Label::kL2),
                                             Pair("c", Label::kBL), Pair("d", Label::kNL)};
  const auto ex = DeriveRanking(pairs);
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].preferred, 1);
  EXPECT_EQ(ex[1].preferred, 2);
  EXPECT_EQ(ex[1].pair_id, "b");
}

TEST(HardSubsetTest, Statistic) {
  EXPECT_DOUBLE_EQ(HardRankingStatistic(0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(HardRankingStatistic(0.4, 0.5), 0.01 / 0.2);
  EXPECT_TRUE(std::isinf(HardRankingStatistic(0.0, 0.5)));
  const std::vector<RankingExample> ex = DeriveRanking(std::vector<PairAnnotation>{
      Pair("a", Label::kL1, 0.5, 0.55), Pair("b", Label::kL1, 0.2, 0.8),
      Pair("c", Label::kL2, 0.0, 0.0)});
  const auto hard = HardRankingSubset(ex);
  ASSERT_EQ(hard.size(), 1u);
  EXPECT_EQ(hard[0].pair_id, "a");
}

TEST(HardSubsetTest, ClassificationNeedsLargeN) {
  const auto ex = DeriveClassification(std::vector<PairAnnotation>{
      Pair("a", Label::kBL, 0.4, 0.41), Pair("b", Label::kNL, 0.9, 0.1)});
  const auto hard = HardClassificationSubset(ex);
  ASSERT_EQ(hard.size(), 2u);
  EXPECT_EQ(hard[0].perturbed, "worda2");
  EXPECT_EQ(hard[1].perturbed, "wordb1");
}

TEST(HardSubsetTest, MissingParamsThrow) {
  PairAnnotation p = Pair("a", Label::kL1);
  p.phi2.reset();
  const auto ranking = DeriveRanking(std::vector<PairAnnotation>{p});
  try {
    HardRankingSubset(ranking);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingMetadata);
  }
  p.label = Label::kL2;
  EXPECT_THROW(HardClassificationSubset(DeriveClassification(std::vector<PairAnnotation>{p})),
               Error);
}

// Reference values from statsmodels.stats.inter_rater.fleiss_kappa.
TEST(FleissTest, MatchesReference) {
  const std::vector<std::vector<int>> classic = {
      {0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0},
      {2, 2, 8, 1, 1},  {7, 7, 0, 0, 0}, {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2},
      {6, 5, 2, 1, 0},  {0, 2, 2, 3, 7}};
  EXPECT_NEAR(FleissKappa(classic), 0.20993070442195522, 1e-14);
  const std::vector<std::vector<int>> three = {{3, 0, 0, 0}, {2, 1, 0, 0}, {1, 1, 1, 0},
                                               {0, 0, 3, 0}, {0, 2, 0, 1}, {1, 0, 0, 2}};
  EXPECT_NEAR(FleissKappa(three), 0.30769230769230765, 1e-14);
  EXPECT_NEAR(FleissKappa({{1, 1}, {1, 1}, {1, 1}}), -1.0, 1e-14);
}

TEST(FleissTest, DegenerateAndInvalid) {
  EXPECT_EQ(FleissKappa({{3, 0}, {3, 0}}), 1.0);
  try {
    FleissKappa({{3, 0}, {3, 0}}, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateMarginals);
  }
  EXPECT_THROW(FleissKappa({}), Error);
  EXPECT_THROW(FleissKappa({{1, 0}}), Error);
  EXPECT_THROW(FleissKappa({{2, 1}, {1, 1}}), Error);
}

TEST(AgreementTest, CountsAndResolves) {
  std::vector<PairAnnotation> a;
  for (Label l : {Label::kL1, Label::kL1, Label::kL1}) a.push_back(Pair("x", l));
  for (Label l : {Label::kL2, Label::kBL, Label::kL2}) a.push_back(Pair("y", l));
  for (Label l : {Label::kL1, Label::kBL, Label::kNL}) a.push_back(Pair("z", l));
  for (Label l : {Label::kNL, Label::kNL, Label::kBL}) a.push_back(Pair("w", l));
  const AgreementStats s = ComputeAgreement(a);
  EXPECT_EQ(s.pairs, 4u);
  EXPECT_DOUBLE_EQ(s.all_agree, 0.25);
  EXPECT_DOUBLE_EQ(s.two_agree, 0.5);
  EXPECT_DOUBLE_EQ(s.none_agree, 0.25);
  ASSERT_EQ(s.resolved.size(), 3u);
  EXPECT_EQ(s.resolved[1].label, Label::kL2);
  EXPECT_EQ(s.resolved[2].label, Label::kNL);
  EXPECT_EQ(ResolvePairs(a).size(), 3u);

  a.pop_back();
  try {
    ComputeAgreement(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongAnnotationCount);
  }
}

TEST(SplitTest, DisjointAndDeterministic) {
  std::vector<std::string> words;
  for (int i = 0; i < 100; ++i) words.push_back("w" + std::to_string(i));
  words.push_back("w7");
  const SplitSpec a = AssignSplits(words, 5);
  const SplitSpec b = AssignSplits(words, 5);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.train.size(), 65u);
  EXPECT_EQ(a.val.size(), 15u);
  EXPECT_EQ(a.test.size(), 20u);
  std::set<std::string> all(a.train.begin(), a.train.end());
  all.insert(a.val.begin(), a.val.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_NE(AssignSplits(words, 6).train, a.train);
  EXPECT_EQ(a.SplitOf(a.test[0]), Split::kTest);
  EXPECT_THROW(a.SplitOf("nope"), Error);
  EXPECT_THROW(AssignSplits(words, 5, {0.5, 0.5, 0.5}), Error);
}

TEST(SplitTest, Violations) {
  std::vector<PairAnnotation> p = {Pair("a", Label::kL1), Pair("b", Label::kL1)};
  p.push_back(Pair("a", Label::kL2, 0.5, 0.5, Split::kTest));
  EXPECT_EQ(SplitViolations(p), std::vector<std::string>{"worda"});
}

TEST(VocabTest, FilterVocab) {
  const std::vector<std::string> raw = {"Hello", "hello", "abc", "it's", "café",
                                        "abcdefghijklmno", "abcdefghijklmn", "Word\r"};
  EXPECT_EQ(FilterVocab(raw),
            (std::vector<std::string>{"hello", "abcdefghijklmn", "word"}));
}

TEST(JsonlTest, RoundTripAndErrors) {
  std::vector<PairAnnotation> pairs = {Pair("a", Label::kL1, 0.3, 0.7, Split::kVal, "ann")};
  pairs.push_back(Pair("b", Label::kNL));
  pairs[1].phi1.reset();
  const std::string text = FormatAnnotationsJsonl(pairs);
  EXPECT_EQ(ParseAnnotationsJsonl(text), pairs);
  EXPECT_EQ(ParseAnnotationsJsonl("\n" + text + "\n  \n").size(), 2u);
  const auto anon =
      ParseAnnotationsJsonl(R"({"word":"x","w1":"y","w2":"z","label":"BL"})");
  EXPECT_EQ(anon[0].pair_id, "line-1");
  EXPECT_EQ(anon[0].split, Split::kTrain);
  try {
    ParseAnnotationsJsonl(text + "{\"word\":\"x\"}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(BuildDatasetTest, StatsOnSmallSet) {
  std::vector<PairAnnotation> a = {Pair("a", Label::kL1, 0.5, 0.52),
                                   Pair("b", Label::kBL, 0.3, 0.6, Split::kVal)};
  for (Label l : {Label::kL2, Label::kL2, Label::kNL}) {
    a.push_back(Pair("t", l, 0.45, 0.5, Split::kTest));
  }
  for (Label l : {Label::kL1, Label::kBL, Label::kNL}) {
    a.push_back(Pair("u", l, 0.45, 0.5, Split::kTest));
  }
  const LegitDataset ds = BuildDataset(a);
  EXPECT_EQ(ds.pairs.size(), 3u);
  EXPECT_EQ(ds.splits[0], (SplitStats{1, 1, 1, 1}));
  EXPECT_EQ(ds.splits[1], (SplitStats{1, 1, 2, 0}));
  EXPECT_EQ(ds.splits[2], (SplitStats{1, 1, 1, 1}));
  EXPECT_EQ(ds.total, (SplitStats{3, 3, 4, 2}));
  ASSERT_TRUE(ds.test_agreement);
  EXPECT_DOUBLE_EQ(ds.test_agreement->none_agree, 0.5);
  EXPECT_EQ(*ds.hard_ranking, 1u);
  EXPECT_EQ(*ds.hard_classification, 1u);
  EXPECT_FALSE(ds.warnings.empty());
  const nlohmann::json j = StatsReport(ds);
  EXPECT_EQ(j.at("splits").at("val").at("classification_examples"), 2);
  EXPECT_EQ(j.at("hard_ranking"), 1);
}

TEST(BuildDatasetTest, FixtureIngest) {
  const LegitDataset ds = IngestLegit(Fixture("synth_annotations.jsonl"));
  EXPECT_EQ(ds.pairs.size(), ds.annotations.size());
  EXPECT_EQ(ds.total.pairs, ds.pairs.size());
  EXPECT_GT(ds.total.classification, ds.total.ranking);
  for (const PairAnnotation& p : ds.pairs) ASSERT_TRUE(p.phi1 && p.phi2);
  EXPECT_TRUE(SplitViolations(ds.pairs).empty());
}

TEST(ReferenceStatsTest, InternallyConsistent) {
  const ReferenceStats& r = LegitReferenceStats();
  size_t pairs = 0, cls = 0, rank = 0;
  for (const SplitStats& s : r.splits) {
    pairs += s.pairs;
    cls += s.classification;
    rank += s.ranking;
  }
  EXPECT_EQ(pairs, r.total.pairs);
  EXPECT_EQ(cls, r.total.classification);
  EXPECT_EQ(rank, r.total.ranking);
  EXPECT_NEAR(r.agreement[0] + r.agreement[1] + r.agreement[2], 1.0, 1e-9);
}

}  // namespace
}  // namespace legit
