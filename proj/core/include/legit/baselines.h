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

#ifndef LEGIT_BASELINES_H_
#define LEGIT_BASELINES_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "legit/dataset.h"
#include "legit/perturber.h"
#include "legit/similarity_index.h"

namespace legit {

// --------------------------------------------------------------------------
// Majority class

// Ranking always prefers w2. Classification predicts whichever class is
// more frequent in the fitting data (legible on ties).
class MajorityClass {
 public:
  static MajorityClass Fit(std::span<const ClassificationExample> train);

  bool PredictLegible() const { return legible_; }
  static int PredictRanking() { return 2; }

 private:
  bool legible_ = true;
};

// --------------------------------------------------------------------------
// Logistic regression on perturbation parameters

struct LogRegConfig {
  double learning_rate = 0.5;
  size_t max_iterations = 20000;
  double tolerance = 1e-6;  // stop once the gradient norm drops below
};

// Full-batch gradient descent on the mean log-loss over standardized
// inputs. Predicts the positive class when sigma(w.x + b) >= 0.5.
class LogisticRegression {
 public:
  // Throws SingleClass when every label is equal, InvalidArgument for
  // empty or ragged input.
  static LogisticRegression Fit(const std::vector<std::vector<double>>& x,
                                const std::vector<bool>& y,
                                const LogRegConfig& config = {});

  double Probability(std::span<const double> x) const;
  bool Predict(std::span<const double> x) const { return Probability(x) >= 0.5; }

  // Raw parameters over standardized inputs: [w..., b].
  std::span<const double> params() const { return params_; }
  size_t iterations() const { return iterations_; }
  bool converged() const { return converged_; }

  nlohmann::json ToJson() const;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> params_;
  size_t iterations_ = 0;
  bool converged_ = false;
};

// Mean log-loss and its gradient for parameters [w..., b] on already
// standardized inputs. Exposed for gradient checking.
double LogisticLoss(std::span<const double> params,
                    const std::vector<std::vector<double>>& x,
                    const std::vector<bool>& y);
std::vector<double> LogisticGradient(std::span<const double> params,
                                     const std::vector<std::vector<double>>& x,
                                     const std::vector<bool>& y);

// (n, k), plus a one-hot over `models` when it is nonempty.
std::vector<double> PhiFeatures(const PerturbParams& phi,
                                const std::vector<std::string>& models = {});
// (n1, k1, n2, k2), plus one-hots for both sides when `models` is nonempty.
std::vector<double> RankingPhiFeatures(const PerturbParams& phi1,
                                       const PerturbParams& phi2,
                                       const std::vector<std::string>& models = {});

// --------------------------------------------------------------------------
// Distance-based models

// Mean per-character distance between equal-length words; unchanged
// positions contribute 0. Throws InvalidArgument on a length mismatch.
double MeanCharDistance(const CharDistance& distance, std::u32string_view w,
                        std::u32string_view wi);

// 1 when w1 is at least as close to w as w2, else 2.
int RankByDistance(const CharDistance& distance, std::u32string_view w,
                   std::u32string_view w1, std::u32string_view w2);

// Legible when the similarity 1 - mean distance reaches the threshold.
class ThresholdClassifier {
 public:
  // Threshold maximizing training F1 over every midpoint between
  // consecutive distinct similarities and the smallest similarity itself;
  // the smallest such threshold wins ties. InvalidArgument on empty input.
  static ThresholdClassifier Fit(std::span<const double> similarities,
                                 const std::vector<bool>& legible);

  explicit ThresholdClassifier(double threshold = 0.0) : threshold_(threshold) {}

  double threshold() const { return threshold_; }
  bool Predict(double similarity) const { return similarity >= threshold_; }
  bool Predict(const CharDistance& distance, std::u32string_view w,
               std::u32string_view wi) const {
    return Predict(1.0 - MeanCharDistance(distance, w, wi));
  }

 private:
  double threshold_;
};

}  // namespace legit

#endif  // LEGIT_BASELINES_H_
