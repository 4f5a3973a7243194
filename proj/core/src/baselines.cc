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

#include "legit/baselines.h"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/scorer.h"

namespace legit {

MajorityClass MajorityClass::Fit(std::span<const ClassificationExample> train) {
  size_t legible = 0;
  for (const auto& ex : train) legible += ex.legible ? 1 : 0;
  MajorityClass m;
  m.legible_ = 2 * legible >= train.size();
  return m;
}

// --------------------------------------------------------------------------

namespace {

double Logit(std::span<const double> params, std::span<const double> x) {
  double z = params[x.size()];
  for (size_t i = 0; i < x.size(); ++i) z += params[i] * x[i];
  return z;
}

}  // namespace

double LogisticLoss(std::span<const double> params,
                    const std::vector<std::vector<double>>& x,
                    const std::vector<bool>& y) {
  double total = 0.0;
  for (size_t r = 0; r < x.size(); ++r) {
    total += LossClassify(Logit(params, x[r]), y[r] ? 1 : 0);
  }
  return x.empty() ? 0.0 : total / x.size();
}

std::vector<double> LogisticGradient(std::span<const double> params,
                                     const std::vector<std::vector<double>>& x,
                                     const std::vector<bool>& y) {
  std::vector<double> g(params.size(), 0.0);
  if (x.empty()) return g;
  const size_t d = params.size() - 1;
  for (size_t r = 0; r < x.size(); ++r) {
    const double e = Sigmoid(Logit(params, x[r])) - (y[r] ? 1.0 : 0.0);
    for (size_t i = 0; i < d; ++i) g[i] += e * x[r][i];
    g[d] += e;
  }
  for (double& v : g) v /= x.size();
  return g;
}

LogisticRegression LogisticRegression::Fit(const std::vector<std::vector<double>>& x,
                                           const std::vector<bool>& y,
                                           const LogRegConfig& config) {
  if (x.empty() || x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "logistic regression needs aligned, nonempty data");
  }
  const size_t d = x[0].size();
  for (const auto& row : x) {
    if (row.size() != d) throw Error(ErrorCode::kInvalidArgument, "ragged feature rows");
  }
  const auto positives = std::count(y.begin(), y.end(), true);
  if (positives == 0 || static_cast<size_t>(positives) == y.size()) {
    throw Error(ErrorCode::kSingleClass, "training labels contain a single class");
  }

  LogisticRegression m;
  m.mean_.assign(d, 0.0);
  m.scale_.assign(d, 0.0);
  for (const auto& row : x) {
    for (size_t i = 0; i < d; ++i) m.mean_[i] += row[i];
  }
  for (double& v : m.mean_) v /= x.size();
  for (const auto& row : x) {
    for (size_t i = 0; i < d; ++i) m.scale_[i] += (row[i] - m.mean_[i]) * (row[i] - m.mean_[i]);
  }
  for (double& v : m.scale_) {
    v = std::sqrt(v / x.size());
    if (!(v > 1e-12)) v = 1.0;
  }
  std::vector<std::vector<double>> z(x.size(), std::vector<double>(d));
  for (size_t r = 0; r < x.size(); ++r) {
    for (size_t i = 0; i < d; ++i) z[r][i] = (x[r][i] - m.mean_[i]) / m.scale_[i];
  }

  m.params_.assign(d + 1, 0.0);
  for (m.iterations_ = 0; m.iterations_ < config.max_iterations; ++m.iterations_) {
    const auto g = LogisticGradient(m.params_, z, y);
    double norm = 0.0;
    for (double v : g) norm += v * v;
    if (std::sqrt(norm) < config.tolerance) {
      m.converged_ = true;
      break;
    }
    for (size_t i = 0; i <= d; ++i) m.params_[i] -= config.learning_rate * g[i];
  }
  return m;
}

double LogisticRegression::Probability(std::span<const double> x) const {
  if (x.size() != mean_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature count does not match the model");
  }
  std::vector<double> z(x.size());
  for (size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean_[i]) / scale_[i];
  return Sigmoid(Logit(params_, z));
}

nlohmann::json LogisticRegression::ToJson() const {
  return {{"params", params_},
          {"feature_mean", mean_},
          {"feature_scale", scale_},
          {"iterations", iterations_},
          {"converged", converged_}};
}

std::vector<double> PhiFeatures(const PerturbParams& phi,
                                const std::vector<std::string>& models) {
  std::vector<double> f = {phi.n, static_cast<double>(phi.k)};
  for (const auto& m : models) f.push_back(phi.model_id == m ? 1.0 : 0.0);
  return f;
}

std::vector<double> RankingPhiFeatures(const PerturbParams& phi1,
                                       const PerturbParams& phi2,
                                       const std::vector<std::string>& models) {
  std::vector<double> f = {phi1.n, static_cast<double>(phi1.k), phi2.n,
                           static_cast<double>(phi2.k)};
  for (const auto& m : models) f.push_back(phi1.model_id == m ? 1.0 : 0.0);
  for (const auto& m : models) f.push_back(phi2.model_id == m ? 1.0 : 0.0);
  return f;
}

// --------------------------------------------------------------------------

double MeanCharDistance(const CharDistance& distance, std::u32string_view w,
                        std::u32string_view wi) {
  if (w.size() != wi.size()) {
    throw Error(ErrorCode::kInvalidArgument, "word and perturbation differ in length");
  }
  if (w.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] != wi[i]) sum += distance.Distance(w[i], wi[i]);
  }
  return sum / w.size();
}

int RankByDistance(const CharDistance& distance, std::u32string_view w,
                   std::u32string_view w1, std::u32string_view w2) {
  return MeanCharDistance(distance, w, w1) <= MeanCharDistance(distance, w, w2) ? 1 : 2;
}

ThresholdClassifier ThresholdClassifier::Fit(std::span<const double> similarities,
                                             const std::vector<bool>& legible) {
  if (similarities.empty() || similarities.size() != legible.size()) {
    throw Error(ErrorCode::kInvalidArgument, "threshold fit needs aligned, nonempty data");
  }
  std::vector<size_t> order(similarities.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return similarities[a] < similarities[b]; });
  const size_t total_pos = std::count(legible.begin(), legible.end(), true);

  // Threshold t predicts legible for every item with similarity >= t. Scan
  // candidates in ascending order; `below` counts items under t.
  double best_t = similarities[order[0]];
  double best_f1 = -1.0;
  size_t pos_below = 0;
  size_t i = 0;
  auto consider = [&](double t) {
    const size_t predicted = order.size() - i;
    const size_t tp = total_pos - pos_below;
    const double f1 = predicted + total_pos == 0 ? 0.0 : 2.0 * tp / (predicted + total_pos);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_t = t;
    }
  };
  consider(similarities[order[0]]);
  while (i < order.size()) {
    const double v = similarities[order[i]];
    while (i < order.size() && similarities[order[i]] == v) {
      pos_below += legible[order[i]] ? 1 : 0;
      ++i;
    }
    if (i < order.size()) consider(0.5 * (v + similarities[order[i]]));
  }
  return ThresholdClassifier(best_t);
}

}  // namespace legit
