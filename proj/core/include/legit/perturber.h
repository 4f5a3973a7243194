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

#ifndef LEGIT_PERTURBER_H_
#define LEGIT_PERTURBER_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "legit/random.h"
#include "legit/similarity_index.h"

namespace legit {

// phi = {n, k, M}: fraction of characters to replace, neighbor rank, and
// the neighbor table (embedding model) to draw substitutes from.
struct PerturbParams {
  double n = 0.0;
  int k = 1;
  std::string model_id = "imgdot";

  void Validate() const;  // n in [0, 1], k >= 1
  bool operator==(const PerturbParams&) const = default;
};

// Independent Gaussians for k and n. A zero variance pins the parameter.
struct ParamPrior {
  double mu_k = 25.0;
  double var_k = 10.0;
  double mu_n = 0.5;
  double var_n = 0.2;

  void Validate() const;  // variances >= 0
  bool operator==(const ParamPrior&) const = default;
};

struct PerturbedWord {
  std::u32string original;
  std::u32string perturbed;
  PerturbParams params;
  std::vector<size_t> positions;  // ascending
  uint64_t seed = 0;
  // n > 0 but floor(n * |w|) == 0, so nothing was replaced.
  bool empty_draw = false;
};

// Number of characters replaced for a word of `length` characters.
size_t ReplacementCount(double n, size_t length);

// Replaces floor(n*|w|) uniformly chosen characters by their rank-k
// neighbor. Throws UnknownCodepoint if any character is missing from the
// table and InvalidArgument for an empty word.
PerturbedWord PerturbWord(std::u32string_view word, const PerturbParams& phi,
                          const NeighborTable& table, uint64_t seed);

// Same, but only positions with eligible[i] set may be chosen and the count
// is floor(n * #eligible). Ineligible characters need not be in the table.
PerturbedWord PerturbWordMasked(std::u32string_view word,
                                const std::vector<bool>& eligible,
                                const PerturbParams& phi,
                                const NeighborTable& table, uint64_t seed);

// k = max(1, round(N(mu_k, var_k))), n = clip(N(mu_n, var_n), 0, 1), model
// uniform over `models`. Draw order is k, n, model.
PerturbParams SampleParams(const ParamPrior& prior,
                           const std::vector<std::string>& models, Rng& rng);

using TableMap = std::map<std::string, const NeighborTable*>;

struct PerturbedPair {
  PerturbedWord first;
  PerturbedWord second;
  bool collision = false;  // both perturbations produced the same string
};

PerturbedPair GeneratePair(std::u32string_view word, const ParamPrior& prior1,
                           const ParamPrior& prior2,
                           const std::vector<std::string>& models,
                           const TableMap& tables, Rng& rng);

struct AdaptiveConfig {
  double alpha = 0.5;  // fraction of the way toward the shared midpoint
  double beta = 0.7;   // variance multiplier per round
  double var_min_n = 0.01;
  double var_min_k = 1.0;
};

// Moves both means toward their midpoint and shrinks both variances.
std::pair<ParamPrior, ParamPrior> AdaptiveUpdate(
    const ParamPrior& prior1, const ParamPrior& prior2,
    const AdaptiveConfig& config = {});

// JSON forms used by the CLI, the dataset files and the service log.
nlohmann::json ToJson(const PerturbParams& phi);
PerturbParams PerturbParamsFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const ParamPrior& prior);
ParamPrior ParamPriorFromJson(const nlohmann::json& j);
// {"w":..., "wi":..., "phi":{...}, "positions":[...], "seed":...}
nlohmann::json ToJson(const PerturbedWord& word);

}  // namespace legit

#endif  // LEGIT_PERTURBER_H_
