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

#ifndef LEGIT_RECOVERY_H_
#define LEGIT_RECOVERY_H_

#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "legit/perturber.h"
#include "legit/similarity_index.h"

namespace legit {

// Guesses the original word behind each perturbed word.
class Recoverer {
 public:
  virtual ~Recoverer() = default;
  virtual std::vector<std::string> Recover(const std::vector<std::string>& perturbed) = 0;
};

// Nearest vocabulary word under mean per-character distance. Same-length
// candidates are preferred; otherwise the closest length is used, aligned
// from the start, with every unmatched position costing 1 and the sum
// divided by the longer length. Character pairs the distance model does
// not cover cost 1. Ties go to the lexicographically smaller word.
class DictionaryRecoverer : public Recoverer {
 public:
  // Throws InvalidArgument for an empty vocabulary.
  DictionaryRecoverer(std::vector<std::string> vocab, const CharDistance& distance);

  std::string RecoverOne(std::string_view perturbed) const;
  std::vector<std::string> Recover(const std::vector<std::string>& perturbed) override;

 private:
  double CharCost(char32_t a, char32_t b) const;

  const CharDistance& distance_;
  std::map<size_t, std::vector<std::u32string>> by_length_;  // sorted per length
  mutable std::mutex cache_mu_;
  mutable std::map<std::pair<char32_t, char32_t>, double> cache_;
};

// Pipes {"id": i, "word": wi} lines through a shell command and expects
// {"id": i, "word": guess} lines back (any order).
class ExternalCommandRecoverer : public Recoverer {
 public:
  explicit ExternalCommandRecoverer(std::string command) : command_(std::move(command)) {}
  std::vector<std::string> Recover(const std::vector<std::string>& perturbed) override;

 private:
  std::string command_;
};

struct RecoveryPair {
  std::string original;
  std::string perturbed;
  double n = 0.0;
};

struct RecoveryReport {
  double n = 0.0;
  size_t total = 0;
  size_t exact = 0;
  size_t stem = 0;  // stem(prediction) == stem(original); includes exact
  double accuracy() const { return total ? static_cast<double>(stem) / total : 0.0; }
  double exact_accuracy() const { return total ? static_cast<double>(exact) / total : 0.0; }
};

// Buckets each pair to the nearest level (lower level on ties) and counts
// exact and Porter-stem matches. Levels must be nonempty.
std::vector<RecoveryReport> EvaluateRecovery(std::span<const RecoveryPair> pairs,
                                             Recoverer& recoverer,
                                             std::vector<double> levels = {0.3, 0.7, 1.0});

// For every level and every vocab word, one perturbation with k drawn from
// `prior` and n fixed at the level. Draws come from one Rng(seed) in
// level-major order.
std::vector<RecoveryPair> GenerateRecoveryPairs(const std::vector<std::string>& vocab,
                                                ParamPrior prior,
                                                const std::vector<double>& levels,
                                                const NeighborTable& table, uint64_t seed);

nlohmann::json ToJson(const RecoveryReport& report);

}  // namespace legit

#endif  // LEGIT_RECOVERY_H_
