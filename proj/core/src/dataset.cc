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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/image_io.h"
#include "legit/random.h"
#include "legit/utf8.h"

namespace legit {

std::string_view LabelName(Label label) {
  switch (label) {
    case Label::kL1: return "L1";
    case Label::kL2: return "L2";
    case Label::kBL: return "BL";
    case Label::kNL: return "NL";
  }
  return "?";
}

Label ParseLabel(std::string_view text) {
  if (text == "L1") return Label::kL1;
  if (text == "L2") return Label::kL2;
  if (text == "BL") return Label::kBL;
  if (text == "NL") return Label::kNL;
  throw Error(ErrorCode::kFormatError, "unknown label '" + std::string(text) + "'");
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val" || text == "valid" || text == "validation") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw Error(ErrorCode::kFormatError, "unknown split '" + std::string(text) + "'");
}

nlohmann::json ToJson(const PairAnnotation& pair) {
  nlohmann::json j = {{"pair", pair.pair_id}, {"word", pair.word},
                      {"w1", pair.w1},        {"w2", pair.w2}};
  if (pair.phi1) j["phi1"] = ToJson(*pair.phi1);
  if (pair.phi2) j["phi2"] = ToJson(*pair.phi2);
  j["label"] = LabelName(pair.label);
  j["annotator"] = pair.annotator;
  j["split"] = SplitName(pair.split);
  return j;
}

PairAnnotation PairAnnotationFromJson(const nlohmann::json& j) {
  PairAnnotation pair;
  pair.pair_id = j.value("pair", std::string());
  pair.word = j.at("word").get<std::string>();
  pair.w1 = j.at("w1").get<std::string>();
  pair.w2 = j.at("w2").get<std::string>();
  if (j.contains("phi1") && !j["phi1"].is_null()) pair.phi1 = PerturbParamsFromJson(j["phi1"]);
  if (j.contains("phi2") && !j["phi2"].is_null()) pair.phi2 = PerturbParamsFromJson(j["phi2"]);
  pair.label = ParseLabel(j.at("label").get<std::string>());
  pair.annotator = j.value("annotator", std::string());
  pair.split = ParseSplit(j.value("split", std::string("train")));
  return pair;
}

nlohmann::json ToJson(const ClassificationExample& example) {
  nlohmann::json j = {{"word", example.word},
                      {"perturbed", example.perturbed},
                      {"legible", example.legible},
                      {"pair", example.pair_id},
                      {"split", SplitName(example.split)}};
  if (example.phi) j["phi"] = ToJson(*example.phi);
  return j;
}

nlohmann::json ToJson(const RankingExample& example) {
  nlohmann::json j = {{"word", example.word},   {"w1", example.w1},
                      {"w2", example.w2},       {"preferred", example.preferred},
                      {"pair", example.pair_id}, {"split", SplitName(example.split)}};
  if (example.phi1) j["phi1"] = ToJson(*example.phi1);
  if (example.phi2) j["phi2"] = ToJson(*example.phi2);
  return j;
}

std::vector<PairAnnotation> ParseAnnotationsJsonl(std::string_view text) {
  std::vector<PairAnnotation> out;
  size_t line_no = 0;
  while (!text.empty()) {
    const size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      PairAnnotation pair = PairAnnotationFromJson(nlohmann::json::parse(line));
      if (pair.pair_id.empty()) pair.pair_id = "line-" + std::to_string(line_no);
      out.push_back(std::move(pair));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError,
                  "annotation line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kFormatError,
                  "annotation line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string FormatAnnotationsJsonl(std::span<const PairAnnotation> pairs) {
  std::string out;
  for (const PairAnnotation& pair : pairs) {
    out += ToJson(pair).dump();
    out += '\n';
  }
  return out;
}

std::vector<std::string> FilterVocab(std::span<const std::string> words) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const std::string& raw : words) {
    std::u32string word;
    try {
      word = DecodeUtf8(raw);
    } catch (const Error&) {
      continue;
    }
    while (!word.empty() && (word.back() == U'\r' || word.back() == U' ')) word.pop_back();
    if (!std::all_of(word.begin(), word.end(), IsAsciiLetter)) continue;
    if (word.size() < 4 || word.size() > 14) continue;
    for (char32_t& c : word) c = AsciiLower(c);
    std::string lowered = EncodeUtf8(word);
    if (seen.insert(lowered).second) out.push_back(std::move(lowered));
  }
  return out;
}

std::vector<ClassificationExample> DeriveClassification(
    std::span<const PairAnnotation> pairs) {
  std::vector<ClassificationExample> out;
  for (const PairAnnotation& p : pairs) {
    auto emit = [&](const std::string& wi, const std::optional<PerturbParams>& phi,
                    bool legible) {
      out.push_back({p.word, wi, legible, p.pair_id, phi, p.split});
    };
    switch (p.label) {
      case Label::kBL:
        emit(p.w1, p.phi1, true);
        emit(p.w2, p.phi2, true);
        break;
      case Label::kNL:
        emit(p.w1, p.phi1, false);
        emit(p.w2, p.phi2, false);
        break;
      case Label::kL1:
        emit(p.w1, p.phi1, true);
        break;
      case Label::kL2:
        emit(p.w2, p.phi2, true);
        break;
    }
  }
  return out;
}

std::vector<RankingExample> DeriveRanking(std::span<const PairAnnotation> pairs) {
  std::vector<RankingExample> out;
  for (const PairAnnotation& p : pairs) {
    if (p.label != Label::kL1 && p.label != Label::kL2) continue;
    out.push_back({p.word, p.w1, p.w2, p.label == Label::kL1 ? 1 : 2, p.pair_id,
                   p.phi1, p.phi2, p.split});
  }
  return out;
}

double HardRankingStatistic(double n1, double n2) {
  const double denom = n1 * n2;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return (n1 - n2) * (n1 - n2) / denom;
}

std::vector<RankingExample> HardRankingSubset(
    std::span<const RankingExample> examples) {
  std::vector<RankingExample> out;
  for (const RankingExample& e : examples) {
    if (!e.phi1 || !e.phi2) {
      throw Error(ErrorCode::kMissingMetadata,
                  "ranking pair '" + e.pair_id + "' has no perturbation parameters");
    }
    if (HardRankingStatistic(e.phi1->n, e.phi2->n) < kHardRankingCutoff) {
      out.push_back(e);
    }
  }
  return out;
}

std::vector<ClassificationExample> HardClassificationSubset(
    std::span<const ClassificationExample> examples) {
  std::vector<ClassificationExample> out;
  for (const ClassificationExample& e : examples) {
    if (!e.phi) {
      throw Error(ErrorCode::kMissingMetadata,
                  "example from pair '" + e.pair_id + "' has no perturbation parameters");
    }
    if (e.phi->n > kHardClassificationMinN) out.push_back(e);
  }
  return out;
}

double FleissKappa(const std::vector<std::vector<int>>& counts, bool strict) {
  if (counts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "kappa needs at least one item");
  }
  const size_t categories = counts.front().size();
  const long raters = std::accumulate(counts.front().begin(), counts.front().end(), 0L);
  if (raters < 2) {
    throw Error(ErrorCode::kInvalidArgument, "kappa needs at least two ratings per item");
  }
  std::vector<double> column(categories, 0.0);
  double observed = 0.0;
  for (const auto& row : counts) {
    if (row.size() != categories ||
        std::accumulate(row.begin(), row.end(), 0L) != raters) {
      throw Error(ErrorCode::kInvalidArgument,
                  "every item needs the same number of ratings");
    }
    double sq = 0.0;
    for (size_t j = 0; j < categories; ++j) {
      if (row[j] < 0) throw Error(ErrorCode::kInvalidArgument, "negative count");
      sq += static_cast<double>(row[j]) * row[j];
      column[j] += row[j];
    }
    observed += (sq - raters) / (static_cast<double>(raters) * (raters - 1));
  }
  const double items = static_cast<double>(counts.size());
  observed /= items;
  double chance = 0.0;
  for (double c : column) {
    const double p = c / (items * raters);
    chance += p * p;
  }
  if (chance >= 1.0) {
    if (strict) {
      throw Error(ErrorCode::kDegenerateMarginals,
                  "chance agreement is 1; kappa undefined");
    }
    return 1.0;
  }
  return (observed - chance) / (1.0 - chance);
}

namespace {

std::vector<std::vector<const PairAnnotation*>> GroupByPair(
    std::span<const PairAnnotation> annotations) {
  std::unordered_map<std::string, size_t> index;
  std::vector<std::vector<const PairAnnotation*>> groups;
  for (const PairAnnotation& a : annotations) {
    auto [it, inserted] = index.emplace(a.pair_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&a);
  }
  return groups;
}

// Label with a strict majority of the group, if any.
std::optional<Label> MajorityLabel(const std::vector<const PairAnnotation*>& group) {
  std::array<int, 4> votes{};
  for (const PairAnnotation* a : group) ++votes[static_cast<int>(a->label)];
  for (int l = 0; l < 4; ++l) {
    if (2 * votes[l] > static_cast<int>(group.size())) return static_cast<Label>(l);
  }
  return std::nullopt;
}

}  // namespace

AgreementStats ComputeAgreement(std::span<const PairAnnotation> annotations) {
  AgreementStats stats;
  size_t all = 0, two = 0, none = 0;
  for (const auto& group : GroupByPair(annotations)) {
    if (group.size() != 3) {
      throw Error(ErrorCode::kWrongAnnotationCount,
                  "pair '" + group.front()->pair_id + "' has " +
                      std::to_string(group.size()) + " annotations, expected 3");
    }
    std::set<Label> distinct;
    for (const PairAnnotation* a : group) distinct.insert(a->label);
    if (distinct.size() == 1) {
      ++all;
    } else if (distinct.size() == 2) {
      ++two;
    } else {
      ++none;
      continue;
    }
    PairAnnotation resolved = *group.front();
    resolved.label = *MajorityLabel(group);
    resolved.annotator.clear();
    stats.resolved.push_back(std::move(resolved));
  }
  stats.pairs = all + two + none;
  if (stats.pairs > 0) {
    const double total = static_cast<double>(stats.pairs);
    stats.all_agree = all / total;
    stats.two_agree = two / total;
    stats.none_agree = none / total;
  }
  return stats;
}

std::vector<PairAnnotation> ResolvePairs(std::span<const PairAnnotation> annotations) {
  std::vector<PairAnnotation> out;
  for (const auto& group : GroupByPair(annotations)) {
    if (group.size() == 1) {
      out.push_back(*group.front());
      continue;
    }
    if (auto label = MajorityLabel(group)) {
      PairAnnotation resolved = *group.front();
      resolved.label = *label;
      resolved.annotator.clear();
      out.push_back(std::move(resolved));
    }
  }
  return out;
}

Split SplitSpec::SplitOf(const std::string& word) const {
  if (std::find(train.begin(), train.end(), word) != train.end()) return Split::kTrain;
  if (std::find(val.begin(), val.end(), word) != val.end()) return Split::kVal;
  if (std::find(test.begin(), test.end(), word) != test.end()) return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument, "word '" + word + "' is in no split");
}

SplitSpec AssignSplits(std::span<const std::string> words, uint64_t seed,
                       std::array<double, 3> fractions) {
  if (fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0 ||
      std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must sum to 1");
  }
  std::vector<std::string> shuffled(words.begin(), words.end());
  std::sort(shuffled.begin(), shuffled.end());
  shuffled.erase(std::unique(shuffled.begin(), shuffled.end()), shuffled.end());
  Rng rng(seed);
  for (size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[UniformIndex(rng, i)]);
  }
  const size_t n = shuffled.size();
  const size_t n_train = static_cast<size_t>(std::floor(fractions[0] * n));
  const size_t n_val = static_cast<size_t>(std::floor(fractions[1] * n));
  SplitSpec spec;
  spec.fractions = fractions;
  spec.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  spec.val.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
  spec.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
  return spec;
}

std::vector<std::string> SplitViolations(std::span<const PairAnnotation> pairs) {
  std::map<std::string, std::set<Split>> seen;
  for (const PairAnnotation& p : pairs) seen[p.word].insert(p.split);
  std::vector<std::string> out;
  for (const auto& [word, splits] : seen) {
    if (splits.size() > 1) out.push_back(word);
  }
  return out;
}

const ReferenceStats& LegitReferenceStats() {
  static const ReferenceStats stats = {
      {{{14622, 4940, 20217, 9027}, {3326, 1140, 4639, 2013}, {3712, 1520, 4774, 2650}}},
      {21660, 7600, 29630, 13690},
      {0.491, 0.436, 0.073},
      1052,
      2626,
  };
  return stats;
}

LegitDataset BuildDataset(std::vector<PairAnnotation> annotations) {
  LegitDataset ds;
  ds.annotations = std::move(annotations);

  std::vector<PairAnnotation> test_raw;
  for (const PairAnnotation& a : ds.annotations) {
    if (a.split == Split::kTest) test_raw.push_back(a);
  }
  // Triple-annotated test pairs lose full-disagreement items here.
  ds.pairs = ResolvePairs(ds.annotations);
  if (!test_raw.empty()) {
    try {
      ds.test_agreement = ComputeAgreement(test_raw);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kWrongAnnotationCount) throw;
      ds.warnings.push_back(std::string("test agreement not computed: ") + e.what());
    }
  }
  ds.classification = DeriveClassification(ds.pairs);
  ds.ranking = DeriveRanking(ds.pairs);

  std::array<std::set<std::string>, 3> words;
  std::set<std::string> all_words;
  for (const PairAnnotation& p : ds.pairs) {
    ++ds.splits[static_cast<int>(p.split)].pairs;
    words[static_cast<int>(p.split)].insert(p.word);
    all_words.insert(p.word);
  }
  for (const auto& e : ds.classification) ++ds.splits[static_cast<int>(e.split)].classification;
  for (const auto& e : ds.ranking) ++ds.splits[static_cast<int>(e.split)].ranking;
  for (int s = 0; s < 3; ++s) {
    ds.splits[s].distinct_words = words[s].size();
    ds.total.pairs += ds.splits[s].pairs;
    ds.total.classification += ds.splits[s].classification;
    ds.total.ranking += ds.splits[s].ranking;
  }
  ds.total.distinct_words = all_words.size();

  std::vector<RankingExample> test_ranking;
  std::vector<ClassificationExample> test_classification;
  for (const auto& e : ds.ranking) if (e.split == Split::kTest) test_ranking.push_back(e);
  for (const auto& e : ds.classification) if (e.split == Split::kTest) test_classification.push_back(e);
  try {
    ds.hard_ranking = HardRankingSubset(test_ranking).size();
    ds.hard_classification = HardClassificationSubset(test_classification).size();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMissingMetadata) throw;
    ds.warnings.push_back(std::string("hard subsets not computed: ") + e.what());
  }

  for (const std::string& word : SplitViolations(ds.pairs)) {
    ds.warnings.push_back("word '" + word + "' appears in more than one split");
  }

  const ReferenceStats& ref = LegitReferenceStats();
  auto check = [&](const std::string& what, size_t got, size_t want) {
    if (got != want) {
      ds.warnings.push_back(what + ": got " + std::to_string(got) + ", reference " +
                            std::to_string(want));
    }
  };
  for (int s = 0; s < 3; ++s) {
    const std::string name(SplitName(static_cast<Split>(s)));
    check(name + " pairs", ds.splits[s].pairs, ref.splits[s].pairs);
    check(name + " distinct words", ds.splits[s].distinct_words, ref.splits[s].distinct_words);
    check(name + " classification examples", ds.splits[s].classification,
          ref.splits[s].classification);
    check(name + " ranking examples", ds.splits[s].ranking, ref.splits[s].ranking);
  }
  check("total pairs", ds.total.pairs, ref.total.pairs);
  check("total classification examples", ds.total.classification, ref.total.classification);
  check("total ranking examples", ds.total.ranking, ref.total.ranking);
  if (ds.hard_ranking) check("hard ranking subset", *ds.hard_ranking, ref.hard_ranking);
  if (ds.hard_classification) {
    check("hard classification subset", *ds.hard_classification, ref.hard_classification);
  }
  if (ds.test_agreement) {
    const double got[3] = {ds.test_agreement->all_agree, ds.test_agreement->two_agree,
                           ds.test_agreement->none_agree};
    const char* names[3] = {"all-three", "two-of-three", "no"};
    for (int i = 0; i < 3; ++i) {
      if (std::abs(got[i] - ref.agreement[i]) >= 0.0005) {
        ds.warnings.push_back(std::string(names[i]) + " agreement: got " +
                              std::to_string(got[i]) + ", reference " +
                              std::to_string(ref.agreement[i]));
      }
    }
  }
  return ds;
}

LegitDataset IngestLegit(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<PairAnnotation> annotations;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      auto part = ParseAnnotationsJsonl(ReadFile(file.string()));
      // Keep ids unique across files.
      for (auto& a : part) {
        if (a.pair_id.rfind("line-", 0) == 0) a.pair_id = file.stem().string() + ":" + a.pair_id;
      }
      annotations.insert(annotations.end(), part.begin(), part.end());
    }
  } else {
    annotations = ParseAnnotationsJsonl(ReadFile(path));
  }
  return BuildDataset(std::move(annotations));
}

nlohmann::json StatsReport(const LegitDataset& ds) {
  auto split_json = [](const SplitStats& s) {
    return nlohmann::json{{"pairs", s.pairs},
                          {"distinct_words", s.distinct_words},
                          {"classification_examples", s.classification},
                          {"ranking_examples", s.ranking}};
  };
  nlohmann::json j;
  j["annotations"] = ds.annotations.size();
  for (int s = 0; s < 3; ++s) {
    j["splits"][std::string(SplitName(static_cast<Split>(s)))] = split_json(ds.splits[s]);
  }
  j["total"] = split_json(ds.total);
  if (ds.test_agreement) {
    j["test_agreement"] = {{"pairs", ds.test_agreement->pairs},
                           {"all_agree", ds.test_agreement->all_agree},
                           {"two_agree", ds.test_agreement->two_agree},
                           {"none_agree", ds.test_agreement->none_agree}};
  }
  if (ds.hard_ranking) j["hard_ranking"] = *ds.hard_ranking;
  if (ds.hard_classification) j["hard_classification"] = *ds.hard_classification;
  j["warnings"] = ds.warnings;
  return j;
}

}  // namespace legit
