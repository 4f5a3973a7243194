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

#ifndef LEGIT_SCORER_H_
#define LEGIT_SCORER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "legit/dataset.h"
#include "legit/random.h"
#include "legit/similarity_index.h"

namespace legit {

// --------------------------------------------------------------------------
// Features

struct FeatureConfig {
  bool rank1 = true;      // count of substitutions that are rank-1 neighbors
  bool external = false;  // distances under an ingested embedding model

  size_t dim() const;
  std::vector<std::string> Names() const;
  bool operator==(const FeatureConfig&) const = default;
};

// Hand-crafted visual-similarity description of a (word, perturbation)
// pair. Per-character distances come from `visual` (ImgDot by default).
class FeatureExtractor {
 public:
  FeatureExtractor(const CharDistance& visual, const NeighborTable* rank1_table,
                   const CharDistance* external = nullptr);

  const FeatureConfig& config() const { return config_; }

  // w and wi must have the same length (InvalidArgument otherwise).
  // Throws UnknownCodepoint for characters the distance model lacks.
  std::vector<double> Extract(std::u32string_view w, std::u32string_view wi) const;

 private:
  const CharDistance& visual_;
  const NeighborTable* rank1_table_;
  const CharDistance* external_;
  FeatureConfig config_;
};

// Feature indices shared by tests and baselines.
enum FeatureIndex : size_t {
  kMeanDistance = 0,
  kMaxDistance,
  kMinReplacedDistance,
  kFractionReplaced,
  kLengthNorm,
  kPositionMean,
  kPositionVariance,
  kRank1Count,
};

// --------------------------------------------------------------------------
// Losses. y = 1 means legible for the classification loss; for the
// contrastive loss y = 0 means w1 is the more legible perturbation.

double LogSigmoid(double x);
double Sigmoid(double x);
double LossClassify(double s, int y);
double LossContrastive(double s1, double s2, int y);
double LossMultitask(double s1, double s2, Label label);

struct LossGrad {
  double loss = 0.0;
  double d_s1 = 0.0;
  double d_s2 = 0.0;
};

// Masked multi-task loss and its derivatives with respect to both scores.
// BL/NL drop the ranking term; L1 drops classify-2; L2 drops classify-1.
LossGrad MultitaskLossGrad(double s1, double s2, Label label);

// --------------------------------------------------------------------------
// Model

enum class ModelKind { kLinear, kMlp };

// Scalar legibility score from a feature vector. Inputs are standardized
// with the stored mean/scale before the head is applied. The same weights
// score both members of a pair.
class LegibilityScorer {
 public:
  static LegibilityScorer Linear(const FeatureConfig& features);
  static LegibilityScorer Mlp(const FeatureConfig& features, size_t hidden,
                              double dropout, uint64_t seed);

  ModelKind kind() const { return kind_; }
  size_t input_dim() const { return input_dim_; }
  size_t hidden() const { return hidden_; }
  double dropout() const { return dropout_; }
  const FeatureConfig& features() const { return features_; }

  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  std::span<const double> feature_mean() const { return feature_mean_; }
  std::span<const double> feature_scale() const { return feature_scale_; }
  void SetStandardization(std::vector<double> mean, std::vector<double> scale);

  // Evaluation-mode score (no dropout).
  double Score(std::span<const double> x) const;

  struct Trace {
    std::vector<double> input;   // standardized
    std::vector<double> hidden;  // post-activation, post-dropout
    std::vector<double> mask;    // ReLU gate times dropout multiplier
    double score = 0.0;
  };
  // Training-mode forward pass when `dropout_rng` is given.
  Trace Forward(std::span<const double> x, Rng* dropout_rng) const;
  // Adds d_score * dScore/dParams to `grad`.
  void Backward(const Trace& trace, double d_score, std::span<double> grad) const;
  // True for parameters that receive weight decay (biases do not).
  bool IsWeight(size_t param_index) const;

  nlohmann::json ToJson() const;
  static LegibilityScorer FromJson(const nlohmann::json& j);
  void Save(const std::string& path) const;
  static LegibilityScorer Load(const std::string& path);

  bool operator==(const LegibilityScorer&) const = default;

 private:
  ModelKind kind_ = ModelKind::kLinear;
  FeatureConfig features_;
  size_t input_dim_ = 0;
  size_t hidden_ = 0;
  double dropout_ = 0.0;
  std::vector<double> feature_mean_;
  std::vector<double> feature_scale_;
  // Linear: [w(d), b]. MLP: [W1(h x d), b1(h), w2(h), b2].
  std::vector<double> params_;
};

inline bool ClassifyScore(double s) { return s > 0.0; }
inline int RankScores(double s1, double s2) { return s1 >= s2 ? 1 : 2; }

// --------------------------------------------------------------------------
// Training

struct TrainExample {
  std::vector<double> x1;
  std::vector<double> x2;
  Label label = Label::kBL;
};

struct TrainConfig {
  double learning_rate = 1e-2;
  size_t batch_size = 32;
  size_t max_epochs = 50;
  size_t patience = 5;
  uint64_t seed = 0;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool standardize = true;

  void Validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  size_t best_epoch = 0;  // 1-based; 0 if nothing beat the initial weights
  double best_val_loss = 0.0;
};

// Mini-batch AdamW on the masked multi-task loss with early stopping on
// validation loss; the best weights are restored. Deterministic in
// cfg.seed. Throws NonFiniteLoss.
TrainHistory Train(LegibilityScorer& model, std::span<const TrainExample> train,
                   std::span<const TrainExample> val, const TrainConfig& cfg);

// Mean evaluation-mode multi-task loss.
double MeanMultitaskLoss(const LegibilityScorer& model,
                         std::span<const TrainExample> examples);

// Max over parameters of |analytic - numeric| / max(|analytic|, 1e-6),
// central differences with step h. Dropout is not applied.
double GradCheck(const LegibilityScorer& model, const TrainExample& example,
                 double h = 1e-5);
double GradCheckClassify(const LegibilityScorer& model, std::span<const double> x,
                         int y, double h = 1e-5);

// Analytic gradient of the multi-task loss for one example.
std::vector<double> MultitaskGradient(const LegibilityScorer& model,
                                      const TrainExample& example);

}  // namespace legit

#endif  // LEGIT_SCORER_H_
