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

#ifndef LEGIT_ATTACK_H_
#define LEGIT_ATTACK_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "legit/perturber.h"
#include "legit/victim.h"

namespace legit {

// One labeled corpus entry. Files are JSONL with "text" and either a
// scalar "label" (stored under the default label name) or a "labels"
// object of booleans.
struct CorpusEntry {
  std::string text;
  std::map<std::string, bool> labels;
};

std::vector<CorpusEntry> ParseCorpusJsonl(std::string_view text,
                                          const std::string& default_label = "toxic");
std::vector<CorpusEntry> LoadCorpus(const std::string& path,
                                    const std::string& default_label = "toxic");

// Splits on ASCII whitespace. Separators are kept so that joining tokens
// and separators reproduces the input exactly.
struct Tokens {
  std::vector<std::string> words;
  std::vector<std::string> separators;  // words.size() + 1 entries
  std::string Join() const;
};
Tokens TokenizeWhitespace(std::string_view text);

// Legibility of a candidate perturbation wi of w. Must be thread-safe.
using LegibilityFn = std::function<double(std::u32string_view w, std::u32string_view wi)>;

struct CorpusAttackConfig {
  ParamPrior prior;
  std::vector<std::string> models = {"imgdot"};
  double threshold = 0.0;
  int max_resamples = 10;
  int max_k = 0;  // caps sampled ranks; 0 = no cap
  uint64_t seed = 0;
  unsigned threads = 1;
};

struct WordAttack {
  size_t sentence = 0;
  size_t token = 0;
  std::string original;
  std::string perturbed;  // equals original when nothing passed the filter
  PerturbParams params;   // of the accepted draw, or of the last rejected one
  double score = 0.0;     // of the accepted candidate
  int attempts = 0;       // candidates scored
  bool accepted = false;  // a changed candidate passed the filter
};

struct PerturbedCorpus {
  std::vector<std::string> texts;
  std::vector<WordAttack> words;  // only tokens with an eligible character
};

// Perturbs every token. Eligible characters are ASCII letters covered by
// the drawn model's table; everything else passes through. A changed
// candidate is kept only if legibility(w, wi) > threshold, else redrawn up
// to max_resamples more times, else the token is left as is. Sentence i
// uses the stream MixSeed(seed, i), so results do not depend on threads.
PerturbedCorpus PerturbCorpus(const std::vector<std::string>& texts,
                              const CorpusAttackConfig& config, const TableMap& tables,
                              const LegibilityFn& legibility);

// Victim performance on clean and perturbed inputs for one perturbation
// level. Accuracy thresholds scores at 0.5. Degradation is clean minus
// perturbed.
struct LabelMetrics {
  double clean_accuracy = 0.0;
  double perturbed_accuracy = 0.0;
  double clean_auc = 0.0;
  double perturbed_auc = 0.0;
  double accuracy_drop() const { return clean_accuracy - perturbed_accuracy; }
  double auc_drop() const { return clean_auc - perturbed_auc; }
};

struct DegradationReport {
  double n = 0.0;
  size_t count = 0;
  std::map<std::string, LabelMetrics> labels;
  // Means over labels.
  double accuracy_drop = 0.0;
  double auc_drop = 0.0;
};

// Throws InvalidArgument when the corpora are not aligned and
// SchemaMismatch when the victim omits a labeled score.
DegradationReport EvaluateVictim(Victim& victim, const std::vector<CorpusEntry>& clean,
                                 const std::vector<std::string>& perturbed, double n);

// Runs PerturbCorpus once per n level, with the n prior fixed at that level
// (variance 0), and evaluates the victim on each result. The clean victim
// predictions are recomputed per level. `outputs`, when given, receives the
// perturbed corpora in level order.
std::vector<DegradationReport> RunAttackLevels(const std::vector<CorpusEntry>& corpus,
                                               Victim& victim,
                                               const CorpusAttackConfig& base,
                                               const std::vector<double>& levels,
                                               const TableMap& tables,
                                               const LegibilityFn& legibility,
                                               std::vector<PerturbedCorpus>* outputs = nullptr);

nlohmann::json ToJson(const DegradationReport& report);
// Header: n,label,count,clean_accuracy,perturbed_accuracy,accuracy_drop,
// clean_auc,perturbed_auc,auc_drop
std::string DegradationCsv(const std::vector<DegradationReport>& reports);

}  // namespace legit

#endif  // LEGIT_ATTACK_H_
