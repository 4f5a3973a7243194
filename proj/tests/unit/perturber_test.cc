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

#include "legit/perturber.h"

#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/random.h"
#include "legit/utf8.h"
#include "test_world.h"

namespace legit {
namespace {

using testing::TheWorld;

TEST(RandomTest, MixSeedSeparatesStreams) {
  std::set<uint64_t> seen;
  for (uint64_t i = 0; i < 1000; ++i) seen.insert(MixSeed(7, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(MixSeed(1, 2), MixSeed(2, 1));
}

TEST(RandomTest, DistributionsLookRight) {
  Rng rng(3);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = StandardNormal(rng);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
  std::map<uint64_t, int> counts;
  for (int i = 0; i < 70000; ++i) ++counts[UniformIndex(rng, 7)];
  for (const auto& [v, c] : counts) EXPECT_NEAR(c, 10000, 400) << v;
  for (int i = 0; i < 1000; ++i) {
    const double u = UniformUnit(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(PerturbTest, ReplacementCountIsFloor) {
  EXPECT_EQ(ReplacementCount(0.0, 9), 0u);
  EXPECT_EQ(ReplacementCount(0.5, 5), 2u);
  EXPECT_EQ(ReplacementCount(1.0, 5), 5u);
  EXPECT_EQ(ReplacementCount(0.19, 5), 0u);
  EXPECT_EQ(ReplacementCount(0.2, 5), 1u);
}

TEST(PerturbTest, ReplacesWithKthNeighbor) {
  const NeighborTable& t = TheWorld().ascii;
  const auto pw = PerturbWord(U"hello", PerturbParams{1.0, 3, "imgdot"}, t, 9);
  ASSERT_EQ(pw.positions.size(), 5u);
  for (size_t i = 0; i < 5; ++i) EXPECT_EQ(pw.perturbed[i], t.KthNeighbor(U"hello"[i], 3));
  EXPECT_FALSE(pw.empty_draw);
}

TEST(PerturbTest, DeterministicInSeed) {
  const NeighborTable& t = TheWorld().ascii;
  const PerturbParams phi{0.5, 2, "imgdot"};
  const auto a = PerturbWord(U"legibility", phi, t, 42);
  const auto b = PerturbWord(U"legibility", phi, t, 42);
  EXPECT_EQ(a.perturbed, b.perturbed);
  EXPECT_EQ(a.positions, b.positions);
  std::set<std::u32string> outs;
  for (uint64_t s = 0; s < 50; ++s) outs.insert(PerturbWord(U"legibility", phi, t, s).perturbed);
  EXPECT_GT(outs.size(), 10u);
}

TEST(PerturbTest, PositionsAreUniform) {
  const NeighborTable& t = TheWorld().ascii;
  std::vector<int> hits(6, 0);
  for (uint64_t s = 0; s < 12000; ++s) {
    for (size_t p : PerturbWord(U"abcdef", PerturbParams{0.34, 1, "imgdot"}, t, s).positions) {
      ++hits[p];
    }
  }
  for (int h : hits) EXPECT_NEAR(h, 4000, 250);
}

TEST(PerturbTest, EmptyDrawAndErrors) {
  const NeighborTable& t = TheWorld().ascii;
  const auto pw = PerturbWord(U"abc", PerturbParams{0.3, 1, "imgdot"}, t, 1);
  EXPECT_TRUE(pw.empty_draw);
  EXPECT_EQ(pw.perturbed, U"abc");
  EXPECT_THROW(PerturbWord(U"", PerturbParams{0.5, 1, "imgdot"}, t, 1), Error);
  EXPECT_THROW(PerturbWord(U"ab1", PerturbParams{1.0, 1, "imgdot"}, t, 1), Error);
  EXPECT_THROW(PerturbWord(U"abc", PerturbParams{1.5, 1, "imgdot"}, t, 1), Error);
  EXPECT_THROW(PerturbWord(U"abc", PerturbParams{0.5, 0, "imgdot"}, t, 1), Error);
}

TEST(PerturbTest, MaskedOnlyTouchesEligible) {
  const NeighborTable& t = TheWorld().ascii;
  const std::u32string w = U"a-b.c!";
  const std::vector<bool> eligible = {true, false, true, false, true, false};
  for (uint64_t s = 0; s < 100; ++s) {
    const auto pw = PerturbWordMasked(w, eligible, PerturbParams{0.67, 1, "imgdot"}, t, s);
    EXPECT_EQ(pw.positions.size(), 2u);
    for (size_t p : pw.positions) EXPECT_TRUE(eligible[p]);
    EXPECT_EQ(pw.perturbed[1], U'-');
    EXPECT_EQ(pw.perturbed[5], U'!');
  }
}

TEST(SampleParamsTest, RespectsBoundsAndMoments) {
  Rng rng(8);
  const ParamPrior prior{25.0, 10.0, 0.5, 0.2};
  double sum_k = 0, sum_n = 0;
  int zeros = 0, ones = 0;
  const int n = 20000;
  std::set<std::string> models;
  for (int i = 0; i < n; ++i) {
    const PerturbParams phi = SampleParams(prior, {"imgdot", "other"}, rng);
    EXPECT_GE(phi.k, 1);
    EXPECT_GE(phi.n, 0.0);
    EXPECT_LE(phi.n, 1.0);
    zeros += phi.n == 0.0;
    ones += phi.n == 1.0;
    sum_k += phi.k;
    sum_n += phi.n;
    models.insert(phi.model_id);
  }
  EXPECT_NEAR(sum_k / n, 25.0, 0.1);
  EXPECT_NEAR(sum_n / n, 0.5, 0.01);
  // P(N(0.5, 0.2) < 0) = Phi(-1.118) ~ 0.132.
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.132, 0.01);
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.132, 0.01);
  EXPECT_EQ(models.size(), 2u);
}

TEST(SampleParamsTest, DegeneratePriorIsExact) {
  Rng rng(1);
  const PerturbParams phi = SampleParams(ParamPrior{3.0, 0.0, 0.7, 0.0}, {"imgdot"}, rng);
  EXPECT_EQ(phi.k, 3);
  EXPECT_EQ(phi.n, 0.7);
  EXPECT_THROW(SampleParams(ParamPrior{3.0, -1.0, 0.7, 0.0}, {"imgdot"}, rng), Error);
}

TEST(GeneratePairTest, DrawsBothSidesFromTheirPriors) {
  const NeighborTable& t = TheWorld().ascii;
  Rng rng(2);
  const TableMap tables = {{"imgdot", &t}};
  const auto p = GeneratePair(U"wonder", ParamPrior{1, 0, 0.5, 0}, ParamPrior{5, 0, 1.0, 0},
                              {"imgdot"}, tables, rng);
  EXPECT_EQ(p.first.params.k, 1);
  EXPECT_EQ(p.first.positions.size(), 3u);
  EXPECT_EQ(p.second.params.k, 5);
  EXPECT_EQ(p.second.positions.size(), 6u);
  EXPECT_FALSE(p.collision);
  EXPECT_THROW(GeneratePair(U"wonder", ParamPrior{}, ParamPrior{}, {"missing"}, tables, rng),
               Error);
}

TEST(AdaptiveUpdateTest, MovesTowardMidpointAndShrinks) {
  const auto [a, b] = AdaptiveUpdate(ParamPrior{20, 10, 0.3, 0.2}, ParamPrior{30, 10, 0.7, 0.2});
  EXPECT_DOUBLE_EQ(a.mu_k, 22.5);
  EXPECT_DOUBLE_EQ(b.mu_k, 27.5);
  EXPECT_DOUBLE_EQ(a.mu_n, 0.4);
  EXPECT_DOUBLE_EQ(b.mu_n, 0.6);
  EXPECT_DOUBLE_EQ(a.var_k, 7.0);
  EXPECT_DOUBLE_EQ(a.var_n, 0.14);
  const auto [c, d] = AdaptiveUpdate(ParamPrior{20, 1.0, 0.3, 0.01}, ParamPrior{30, 1.0, 0.7, 0.01});
  EXPECT_DOUBLE_EQ(c.var_k, 1.0);
  EXPECT_DOUBLE_EQ(d.var_n, 0.01);
}

TEST(PerturbJsonTest, RoundTrips) {
  const PerturbParams phi{0.25, 7, "imgdot"};
  EXPECT_EQ(PerturbParamsFromJson(ToJson(phi)), phi);
  const ParamPrior prior{21, 3, 0.4, 0.05};
  EXPECT_EQ(ParamPriorFromJson(ToJson(prior)), prior);
  const auto pw = PerturbWord(U"test", PerturbParams{0.5, 1, "imgdot"}, TheWorld().ascii, 3);
  const nlohmann::json j = ToJson(pw);
  EXPECT_EQ(j.at("w"), "test");
  EXPECT_EQ(j.at("wi"), EncodeUtf8(pw.perturbed));
  EXPECT_EQ(j.at("positions").size(), 2u);
}

}  // namespace
}  // namespace legit
