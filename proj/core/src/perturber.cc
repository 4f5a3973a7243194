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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/utf8.h"

namespace legit {

void PerturbParams::Validate() const {
  if (!(n >= 0.0 && n <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "n must lie in [0, 1]");
  }
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
}

void ParamPrior::Validate() const {
  if (!(var_k >= 0.0) || !(var_n >= 0.0) || !std::isfinite(mu_k) ||
      !std::isfinite(mu_n)) {
    throw Error(ErrorCode::kInvalidArgument,
                "prior needs finite means and non-negative variances");
  }
}

size_t ReplacementCount(double n, size_t length) {
  return static_cast<size_t>(std::floor(n * static_cast<double>(length)));
}

PerturbedWord PerturbWordMasked(std::u32string_view word,
                                const std::vector<bool>& eligible,
                                const PerturbParams& phi,
                                const NeighborTable& table, uint64_t seed) {
  phi.Validate();
  if (word.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot perturb an empty word");
  }
  if (eligible.size() != word.size()) {
    throw Error(ErrorCode::kInvalidArgument, "eligibility mask length mismatch");
  }
  std::vector<size_t> candidates;
  for (size_t i = 0; i < word.size(); ++i) {
    if (!eligible[i]) continue;
    if (!table.Contains(word[i])) {
      throw Error(ErrorCode::kUnknownCodepoint,
                  FormatCodepoint(word[i]) + " is not a substitution candidate");
    }
    candidates.push_back(i);
  }

  PerturbedWord out;
  out.original = std::u32string(word);
  out.perturbed = out.original;
  out.params = phi;
  out.seed = seed;
  const size_t count = ReplacementCount(phi.n, candidates.size());
  out.empty_draw = count == 0 && phi.n > 0.0;

  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  Rng rng(seed);
  for (size_t i = 0; i < count; ++i) {
    const size_t j = i + UniformIndex(rng, candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  out.positions.assign(candidates.begin(), candidates.begin() + count);
  std::sort(out.positions.begin(), out.positions.end());
  for (size_t pos : out.positions) {
    out.perturbed[pos] = table.KthNeighbor(word[pos], phi.k);
  }
  return out;
}

PerturbedWord PerturbWord(std::u32string_view word, const PerturbParams& phi,
                          const NeighborTable& table, uint64_t seed) {
  return PerturbWordMasked(word, std::vector<bool>(word.size(), true), phi,
                           table, seed);
}

PerturbParams SampleParams(const ParamPrior& prior,
                           const std::vector<std::string>& models, Rng& rng) {
  prior.Validate();
  if (models.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no embedding models to sample from");
  }
  PerturbParams phi;
  const double k = prior.mu_k + std::sqrt(prior.var_k) * StandardNormal(rng);
  phi.k = static_cast<int>(std::max(1.0, std::round(std::min(k, 1e9))));
  const double n = prior.mu_n + std::sqrt(prior.var_n) * StandardNormal(rng);
  phi.n = std::clamp(n, 0.0, 1.0);
  phi.model_id = models[UniformIndex(rng, models.size())];
  return phi;
}

PerturbedPair GeneratePair(std::u32string_view word, const ParamPrior& prior1,
                           const ParamPrior& prior2,
                           const std::vector<std::string>& models,
                           const TableMap& tables, Rng& rng) {
  auto one = [&](const ParamPrior& prior) {
    PerturbParams phi = SampleParams(prior, models, rng);
    const uint64_t seed = rng();
    auto it = tables.find(phi.model_id);
    if (it == tables.end() || it->second == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no neighbor table for model '" + phi.model_id + "'");
    }
    return PerturbWord(word, phi, *it->second, seed);
  };
  PerturbedPair pair;
  pair.first = one(prior1);
  pair.second = one(prior2);
  pair.collision = pair.first.perturbed == pair.second.perturbed;
  return pair;
}

std::pair<ParamPrior, ParamPrior> AdaptiveUpdate(const ParamPrior& prior1,
                                                 const ParamPrior& prior2,
                                                 const AdaptiveConfig& config) {
  const double mid_k = 0.5 * (prior1.mu_k + prior2.mu_k);
  const double mid_n = 0.5 * (prior1.mu_n + prior2.mu_n);
  auto step = [&](const ParamPrior& p) {
    ParamPrior q;
    q.mu_k = p.mu_k + config.alpha * (mid_k - p.mu_k);
    q.mu_n = p.mu_n + config.alpha * (mid_n - p.mu_n);
    q.var_k = std::max(p.var_k * config.beta, config.var_min_k);
    q.var_n = std::max(p.var_n * config.beta, config.var_min_n);
    return q;
  };
  return {step(prior1), step(prior2)};
}

nlohmann::json ToJson(const PerturbParams& phi) {
  return {{"n", phi.n}, {"k", phi.k}, {"model", phi.model_id}};
}

PerturbParams PerturbParamsFromJson(const nlohmann::json& j) {
  PerturbParams phi;
  phi.n = j.at("n").get<double>();
  phi.k = j.at("k").get<int>();
  phi.model_id = j.value("model", std::string("imgdot"));
  return phi;
}

nlohmann::json ToJson(const ParamPrior& prior) {
  return {{"mu_k", prior.mu_k},
          {"var_k", prior.var_k},
          {"mu_n", prior.mu_n},
          {"var_n", prior.var_n}};
}

ParamPrior ParamPriorFromJson(const nlohmann::json& j) {
  ParamPrior prior;
  prior.mu_k = j.value("mu_k", prior.mu_k);
  prior.var_k = j.value("var_k", prior.var_k);
  prior.mu_n = j.value("mu_n", prior.mu_n);
  prior.var_n = j.value("var_n", prior.var_n);
  prior.Validate();
  return prior;
}

nlohmann::json ToJson(const PerturbedWord& word) {
  nlohmann::json j = {{"w", EncodeUtf8(word.original)},
                      {"wi", EncodeUtf8(word.perturbed)},
                      {"phi", ToJson(word.params)},
                      {"positions", word.positions},
                      {"seed", word.seed}};
  if (word.empty_draw) j["empty_draw"] = true;
  return j;
}

}  // namespace legit
