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

#ifndef LEGIT_DATASET_H_
#define LEGIT_DATASET_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "legit/perturber.h"

namespace legit {

// L1: w1 preferred, L2: w2 preferred, BL: both legible, NL: neither legible.
enum class Label { kL1, kL2, kBL, kNL };
std::string_view LabelName(Label label);
Label ParseLabel(std::string_view text);  // throws FormatError

enum class Split { kTrain, kVal, kTest };
std::string_view SplitName(Split split);
Split ParseSplit(std::string_view text);  // accepts "valid"/"validation" too

struct PairAnnotation {
  std::string pair_id;
  std::string word;
  std::string w1;
  std::string w2;
  std::optional<PerturbParams> phi1;
  std::optional<PerturbParams> phi2;
  Label label = Label::kBL;
  std::string annotator;
  Split split = Split::kTrain;

  bool operator==(const PairAnnotation&) const = default;
};

struct ClassificationExample {
  std::string word;
  std::string perturbed;
  bool legible = false;
  std::string pair_id;
  std::optional<PerturbParams> phi;
  Split split = Split::kTrain;
};

struct RankingExample {
  std::string word;
  std::string w1;
  std::string w2;
  int preferred = 1;  // 1 or 2
  std::string pair_id;
  std::optional<PerturbParams> phi1;
  std::optional<PerturbParams> phi2;
  Split split = Split::kTrain;
};

nlohmann::json ToJson(const PairAnnotation& pair);
PairAnnotation PairAnnotationFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const ClassificationExample& example);
nlohmann::json ToJson(const RankingExample& example);

// One JSON object per line; blank lines skipped. Lines without "pair" get
// "line-<n>" ids.
std::vector<PairAnnotation> ParseAnnotationsJsonl(std::string_view text);
std::string FormatAnnotationsJsonl(std::span<const PairAnnotation> pairs);

// Lowercases, drops tokens with non-letter characters, keeps 4..14
// characters, removes duplicates (first occurrence wins).
std::vector<std::string> FilterVocab(std::span<const std::string> words);

// BL -> both legible, NL -> both illegible, L1 -> w1 legible (w2 unknown,
// excluded), L2 -> w2 legible.
std::vector<ClassificationExample> DeriveClassification(
    std::span<const PairAnnotation> pairs);
// One example per L1/L2 pair; BL and NL carry no ranking.
std::vector<RankingExample> DeriveRanking(std::span<const PairAnnotation> pairs);

// (n1 - n2)^2 / (n1 n2); +inf when either n is zero.
double HardRankingStatistic(double n1, double n2);
inline constexpr double kHardRankingCutoff = 0.1;
inline constexpr double kHardClassificationMinN = 0.4;

// Pairs with statistic < 0.1. Throws MissingMetadata without phi.
std::vector<RankingExample> HardRankingSubset(
    std::span<const RankingExample> examples);
// Perturbations with n > 0.4 (strict). Throws MissingMetadata without phi.
std::vector<ClassificationExample> HardClassificationSubset(
    std::span<const ClassificationExample> examples);

// Fleiss' kappa over an items x categories count matrix. Every row must sum
// to the same number of raters r >= 2. When chance agreement is exactly 1
// (a single category used throughout) kappa is taken to be 1, unless
// `strict` is set, in which case DegenerateMarginals is thrown.
double FleissKappa(const std::vector<std::vector<int>>& counts,
                   bool strict = false);

struct AgreementStats {
  size_t pairs = 0;
  double all_agree = 0.0;   // all three labels equal
  double two_agree = 0.0;   // exactly two equal
  double none_agree = 0.0;  // three distinct labels
  // One record per pair with its majority label; full-disagreement pairs
  // are dropped.
  std::vector<PairAnnotation> resolved;
};

// Groups by pair_id (first-appearance order). Throws WrongAnnotationCount
// unless every pair has exactly three annotations.
AgreementStats ComputeAgreement(std::span<const PairAnnotation> annotations);

// Collapses repeated annotations of a pair to their majority label.
// Single annotations pass through; pairs without a strict majority are
// dropped.
std::vector<PairAnnotation> ResolvePairs(std::span<const PairAnnotation> annotations);

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::array<double, 3> fractions{0.65, 0.15, 0.20};

  // Throws InvalidArgument for an unknown word.
  Split SplitOf(const std::string& word) const;
};

// Seeded shuffle, then train/val sizes are floor(fraction * |words|) and
// test takes the remainder.
SplitSpec AssignSplits(std::span<const std::string> words, uint64_t seed,
                       std::array<double, 3> fractions = {0.65, 0.15, 0.20});

// Words that occur in more than one split.
std::vector<std::string> SplitViolations(std::span<const PairAnnotation> pairs);

struct SplitStats {
  size_t pairs = 0;
  size_t distinct_words = 0;
  size_t classification = 0;
  size_t ranking = 0;
  bool operator==(const SplitStats&) const = default;
};

struct ReferenceStats {
  std::array<SplitStats, 3> splits;  // train, val, test
  SplitStats total;
  std::array<double, 3> agreement;   // all, two, none
  size_t hard_ranking = 0;
  size_t hard_classification = 0;
};

// Published LEGIT statistics used as ingest cross-checks.
const ReferenceStats& LegitReferenceStats();

struct LegitDataset {
  std::vector<PairAnnotation> annotations;  // as read
  std::vector<PairAnnotation> pairs;        // resolved, one per pair
  std::vector<ClassificationExample> classification;
  std::vector<RankingExample> ranking;
  std::array<SplitStats, 3> splits;
  SplitStats total;
  std::optional<AgreementStats> test_agreement;
  std::optional<size_t> hard_ranking;         // test split
  std::optional<size_t> hard_classification;  // test split
  std::vector<std::string> warnings;          // reference-stat mismatches
};

// Builds every derived view of a set of annotations and compares the
// result to the reference statistics (mismatches become warnings).
LegitDataset BuildDataset(std::vector<PairAnnotation> annotations);

// Reads one JSONL file, or every *.jsonl file of a directory in name order.
LegitDataset IngestLegit(const std::string& path);

nlohmann::json StatsReport(const LegitDataset& dataset);

}  // namespace legit

#endif  // LEGIT_DATASET_H_
