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

#include "legit/scorer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/image_io.h"
#include "legit/utf8.h"

namespace legit {

// --------------------------------------------------------------------------
// Features

size_t FeatureConfig::dim() const {
  return 7 + (rank1 ? 1 : 0) + (external ? 2 : 0);
}

std::vector<std::string> FeatureConfig::Names() const {
  std::vector<std::string> names = {"mean_distance",   "max_distance",
                                    "min_replaced_distance", "fraction_replaced",
                                    "length_norm",     "position_mean",
                                    "position_variance"};
  if (rank1) names.push_back("rank1_count");
  if (external) {
    names.push_back("external_mean_distance");
    names.push_back("external_max_distance");
  }
  return names;
}

FeatureExtractor::FeatureExtractor(const CharDistance& visual,
                                   const NeighborTable* rank1_table,
                                   const CharDistance* external)
    : visual_(visual), rank1_table_(rank1_table), external_(external) {
  config_.rank1 = rank1_table != nullptr;
  config_.external = external != nullptr;
}

std::vector<double> FeatureExtractor::Extract(std::u32string_view w,
                                              std::u32string_view wi) const {
  if (w.size() != wi.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "word and perturbation differ in length");
  }
  if (w.empty()) throw Error(ErrorCode::kInvalidArgument, "empty word");
  const size_t len = w.size();
  std::vector<double> f(config_.dim(), 0.0);

  double sum = 0.0, max = 0.0, min_replaced = 0.0;
  double ext_sum = 0.0, ext_max = 0.0;
  std::vector<double> positions;
  size_t rank1 = 0;
  for (size_t i = 0; i < len; ++i) {
    if (w[i] == wi[i]) continue;
    const double d = visual_.Distance(w[i], wi[i]);
    sum += d;
    max = std::max(max, d);
    min_replaced = positions.empty() ? d : std::min(min_replaced, d);
    positions.push_back(len > 1 ? static_cast<double>(i) / (len - 1) : 0.0);
    if (rank1_table_ && rank1_table_->Contains(w[i]) &&
        rank1_table_->KthNeighbor(w[i], 1) == wi[i]) {
      ++rank1;
    }
    if (external_) {
      const double e = external_->Distance(w[i], wi[i]);
      ext_sum += e;
      ext_max = std::max(ext_max, e);
    }
  }
  f[kMeanDistance] = sum / len;
  f[kMaxDistance] = max;
  f[kMinReplacedDistance] = min_replaced;
  f[kFractionReplaced] = static_cast<double>(positions.size()) / len;
  f[kLengthNorm] = static_cast<double>(len) / 14.0;
  if (!positions.empty()) {
    double mean = 0.0;
    for (double p : positions) mean += p;
    mean /= positions.size();
    double var = 0.0;
    for (double p : positions) var += (p - mean) * (p - mean);
    f[kPositionMean] = mean;
    f[kPositionVariance] = var / positions.size();
  }
  size_t next = kPositionVariance + 1;
  if (config_.rank1) f[next++] = static_cast<double>(rank1);
  if (config_.external) {
    f[next++] = ext_sum / len;
    f[next++] = ext_max;
  }
  return f;
}

// --------------------------------------------------------------------------
// Losses

namespace {

// log(1 + e^x) without overflow.
double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double LogSigmoid(double x) { return -Softplus(-x); }

double LossClassify(double s, int y) {
  // -y log s(s) - (1-y) log(1 - s(s)), with log(1 - s(s)) = log s(-s).
  return y * Softplus(-s) + (1 - y) * Softplus(s);
}

double LossContrastive(double s1, double s2, int y) {
  const double d = s1 - s2;
  return (1 - y) * Softplus(-d) + y * Softplus(d);
}

LossGrad MultitaskLossGrad(double s1, double s2, Label label) {
  LossGrad g;
  auto classify = [&](double s, int y, double& d_s) {
    g.loss += LossClassify(s, y);
    d_s += Sigmoid(s) - y;
  };
  auto contrastive = [&](int y) {
    g.loss += LossContrastive(s1, s2, y);
    const double d = Sigmoid(s1 - s2) - (1 - y);
    g.d_s1 += d;
    g.d_s2 -= d;
  };
  switch (label) {
    case Label::kL1:
      classify(s1, 1, g.d_s1);
      contrastive(0);
      break;
    case Label::kL2:
      classify(s2, 1, g.d_s2);
      contrastive(1);
      break;
    case Label::kBL:
      classify(s1, 1, g.d_s1);
      classify(s2, 1, g.d_s2);
      break;
    case Label::kNL:
      classify(s1, 0, g.d_s1);
      classify(s2, 0, g.d_s2);
      break;
  }
  return g;
}

double LossMultitask(double s1, double s2, Label label) {
  return MultitaskLossGrad(s1, s2, label).loss;
}

// --------------------------------------------------------------------------
// Model

LegibilityScorer LegibilityScorer::Linear(const FeatureConfig& features) {
  LegibilityScorer m;
  m.kind_ = ModelKind::kLinear;
  m.features_ = features;
  m.input_dim_ = features.dim();
  m.feature_mean_.assign(m.input_dim_, 0.0);
  m.feature_scale_.assign(m.input_dim_, 1.0);
  m.params_.assign(m.input_dim_ + 1, 0.0);
  return m;
}

LegibilityScorer LegibilityScorer::Mlp(const FeatureConfig& features, size_t hidden,
                                       double dropout, uint64_t seed) {
  if (hidden == 0 || dropout < 0.0 || dropout >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "MLP needs hidden > 0 and dropout in [0, 1)");
  }
  LegibilityScorer m;
  m.kind_ = ModelKind::kMlp;
  m.features_ = features;
  m.input_dim_ = features.dim();
  m.hidden_ = hidden;
  m.dropout_ = dropout;
  m.feature_mean_.assign(m.input_dim_, 0.0);
  m.feature_scale_.assign(m.input_dim_, 1.0);
  const size_t d = m.input_dim_;
  m.params_.assign(hidden * d + hidden + hidden + 1, 0.0);
  Rng rng(seed);
  const double s1 = std::sqrt(2.0 / d);
  for (size_t i = 0; i < hidden * d; ++i) m.params_[i] = s1 * StandardNormal(rng);
  // Small positive bias keeps units active at initialization.
  for (size_t i = 0; i < hidden; ++i) m.params_[hidden * d + i] = 0.1;
  const double s2 = std::sqrt(1.0 / hidden);
  for (size_t i = 0; i < hidden; ++i) {
    m.params_[hidden * d + hidden + i] = s2 * StandardNormal(rng);
  }
  return m;
}

void LegibilityScorer::SetStandardization(std::vector<double> mean,
                                          std::vector<double> scale) {
  if (mean.size() != input_dim_ || scale.size() != input_dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "standardization size mismatch");
  }
  for (double s : scale) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidArgument, "feature scales must be positive");
    }
  }
  feature_mean_ = std::move(mean);
  feature_scale_ = std::move(scale);
}

bool LegibilityScorer::IsWeight(size_t i) const {
  if (kind_ == ModelKind::kLinear) return i < input_dim_;
  const size_t d = input_dim_, h = hidden_;
  return i < h * d || (i >= h * d + h && i < h * d + 2 * h);
}

LegibilityScorer::Trace LegibilityScorer::Forward(std::span<const double> x,
                                                  Rng* dropout_rng) const {
  if (x.size() != input_dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(input_dim_) + " features, got " +
                    std::to_string(x.size()));
  }
  Trace t;
  t.input.resize(input_dim_);
  for (size_t i = 0; i < input_dim_; ++i) {
    t.input[i] = (x[i] - feature_mean_[i]) / feature_scale_[i];
  }
  const size_t d = input_dim_;
  if (kind_ == ModelKind::kLinear) {
    double s = params_[d];
    for (size_t i = 0; i < d; ++i) s += params_[i] * t.input[i];
    t.score = s;
    return t;
  }
  const size_t h = hidden_;
  const double* w1 = params_.data();
  const double* b1 = w1 + h * d;
  const double* w2 = b1 + h;
  const double b2 = w2[h];
  t.hidden.resize(h);
  t.mask.assign(h, 1.0);
  double s = b2;
  for (size_t j = 0; j < h; ++j) {
    double z = b1[j];
    for (size_t i = 0; i < d; ++i) z += w1[j * d + i] * t.input[i];
    double keep = 1.0;
    if (dropout_rng != nullptr && dropout_ > 0.0) {
      keep = Bernoulli(*dropout_rng, dropout_) ? 0.0 : 1.0 / (1.0 - dropout_);
    }
    // The mask also carries the ReLU gate so Backward needs nothing else.
    t.mask[j] = z > 0.0 ? keep : 0.0;
    const double a = z * t.mask[j];
    t.hidden[j] = a;
    s += w2[j] * a;
  }
  t.score = s;
  return t;
}

void LegibilityScorer::Backward(const Trace& t, double d_score,
                                std::span<double> grad) const {
  const size_t d = input_dim_;
  if (kind_ == ModelKind::kLinear) {
    for (size_t i = 0; i < d; ++i) grad[i] += d_score * t.input[i];
    grad[d] += d_score;
    return;
  }
  const size_t h = hidden_;
  const double* w2 = params_.data() + h * d + h;
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + h * d;
  double* g_w2 = g_b1 + h;
  for (size_t j = 0; j < h; ++j) {
    g_w2[j] += d_score * t.hidden[j];
    // mask is 0 for gated units, the dropout multiplier (or 1) otherwise.
    const double dz = d_score * w2[j] * t.mask[j];
    if (dz == 0.0) continue;
    g_b1[j] += dz;
    for (size_t i = 0; i < d; ++i) g_w1[j * d + i] += dz * t.input[i];
  }
  g_w2[h] += d_score;
}

double LegibilityScorer::Score(std::span<const double> x) const {
  return Forward(x, nullptr).score;
}

nlohmann::json LegibilityScorer::ToJson() const {
  return {{"format", "legit-scorer"},
          {"version", 1},
          {"kind", kind_ == ModelKind::kLinear ? "linear" : "mlp"},
          {"input_dim", input_dim_},
          {"hidden", hidden_},
          {"dropout", dropout_},
          {"features",
           {{"rank1", features_.rank1},
            {"external", features_.external},
            {"names", features_.Names()}}},
          {"feature_mean", feature_mean_},
          {"feature_scale", feature_scale_},
          {"params", params_}};
}

LegibilityScorer LegibilityScorer::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("format") != "legit-scorer" || j.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kFormatError, "not a version-1 legit-scorer model");
    }
    FeatureConfig features;
    features.rank1 = j.at("features").at("rank1").get<bool>();
    features.external = j.at("features").at("external").get<bool>();
    const std::string kind = j.at("kind").get<std::string>();
    LegibilityScorer m;
    if (kind == "linear") {
      m = Linear(features);
    } else if (kind == "mlp") {
      m = Mlp(features, j.at("hidden").get<size_t>(), j.at("dropout").get<double>(), 0);
    } else {
      throw Error(ErrorCode::kFormatError, "unknown model kind '" + kind + "'");
    }
    if (j.at("input_dim").get<size_t>() != m.input_dim_) {
      throw Error(ErrorCode::kDimensionMismatch, "input_dim does not match features");
    }
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != m.params_.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "parameter count mismatch");
    }
    m.params_ = std::move(params);
    m.SetStandardization(j.at("feature_mean").get<std::vector<double>>(),
                         j.at("feature_scale").get<std::vector<double>>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("scorer model: ") + e.what());
  }
}

void LegibilityScorer::Save(const std::string& path) const {
  WriteFile(path, ToJson().dump(1) + "\n");
}

LegibilityScorer LegibilityScorer::Load(const std::string& path) {
  try {
    return FromJson(nlohmann::json::parse(ReadFile(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, path + ": " + e.what());
  }
}

// --------------------------------------------------------------------------
// Training

void TrainConfig::Validate() const {
  if (learning_rate < 0.0 || batch_size == 0 || patience == 0 || weight_decay < 0.0 ||
      beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 || epsilon <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training configuration");
  }
}

namespace {

// Accumulates the example's gradient into `grad` and returns its loss.
double AccumulateExample(const LegibilityScorer& model, const TrainExample& ex,
                         Rng* dropout_rng, std::span<double> grad) {
  // Siamese: one set of weights, two forward passes.
  const auto t1 = model.Forward(ex.x1, dropout_rng);
  const auto t2 = model.Forward(ex.x2, dropout_rng);
  const LossGrad g = MultitaskLossGrad(t1.score, t2.score, ex.label);
  if (g.d_s1 != 0.0) model.Backward(t1, g.d_s1, grad);
  if (g.d_s2 != 0.0) model.Backward(t2, g.d_s2, grad);
  return g.loss;
}

}  // namespace

std::vector<double> MultitaskGradient(const LegibilityScorer& model,
                                      const TrainExample& example) {
  std::vector<double> grad(model.params().size(), 0.0);
  AccumulateExample(model, example, nullptr, grad);
  return grad;
}

double MeanMultitaskLoss(const LegibilityScorer& model,
                         std::span<const TrainExample> examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const TrainExample& ex : examples) {
    total += LossMultitask(model.Score(ex.x1), model.Score(ex.x2), ex.label);
  }
  return total / examples.size();
}

TrainHistory Train(LegibilityScorer& model, std::span<const TrainExample> train,
                   std::span<const TrainExample> val, const TrainConfig& cfg) {
  cfg.Validate();
  if (train.empty() || val.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "training and validation sets must be nonempty");
  }
  const size_t d = model.input_dim();
  if (cfg.standardize) {
    std::vector<double> mean(d, 0.0), scale(d, 0.0);
    const double count = 2.0 * train.size();
    for (const auto& ex : train) {
      for (size_t i = 0; i < d; ++i) mean[i] += ex.x1.at(i) + ex.x2.at(i);
    }
    for (double& m : mean) m /= count;
    for (const auto& ex : train) {
      for (size_t i = 0; i < d; ++i) {
        scale[i] += (ex.x1[i] - mean[i]) * (ex.x1[i] - mean[i]) +
                    (ex.x2[i] - mean[i]) * (ex.x2[i] - mean[i]);
      }
    }
    for (double& s : scale) {
      s = std::sqrt(s / count);
      if (!(s > 1e-12)) s = 1.0;
    }
    model.SetStandardization(std::move(mean), std::move(scale));
  }

  const size_t p = model.params().size();
  std::vector<double> m1(p, 0.0), m2(p, 0.0), grad(p, 0.0);
  std::vector<double> best(model.params().begin(), model.params().end());
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(MixSeed(cfg.seed, 1));
  Rng dropout_rng(MixSeed(cfg.seed, 2));

  TrainHistory history;
  history.best_val_loss = MeanMultitaskLoss(model, val);
  size_t since_best = 0;
  uint64_t step = 0;
  for (size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[UniformIndex(shuffle_rng, i)]);
    }
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (size_t b = start; b < end; ++b) {
        batch_loss += AccumulateExample(model, train[order[b]], &dropout_rng, grad);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "non-finite loss at epoch " + std::to_string(epoch) + ", batch starting " +
                        std::to_string(start) + " (learning rate " +
                        std::to_string(cfg.learning_rate) + ")");
      }
      epoch_loss += batch_loss;
      const double inv = 1.0 / static_cast<double>(end - start);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      auto params = model.mutable_params();
      for (size_t i = 0; i < p; ++i) {
        const double g = grad[i] * inv;
        m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g;
        m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g * g;
        if (model.IsWeight(i)) params[i] -= cfg.learning_rate * cfg.weight_decay * params[i];
        params[i] -= cfg.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + cfg.epsilon);
      }
    }
    const double val_loss = MeanMultitaskLoss(model, val);
    if (!std::isfinite(val_loss)) {
      throw Error(ErrorCode::kNonFiniteLoss,
                  "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    history.train_loss.push_back(epoch_loss / train.size());
    history.val_loss.push_back(val_loss);
    if (val_loss < history.best_val_loss) {
      best.assign(model.params().begin(), model.params().end());
      history.best_val_loss = val_loss;
      history.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= cfg.patience) break;
  }
  std::copy(best.begin(), best.end(), model.mutable_params().begin());
  return history;
}

namespace {

template <typename LossFn>
double CompareGradients(const LegibilityScorer& model, const std::vector<double>& analytic,
                        LossFn loss, double h) {
  LegibilityScorer probe = model;
  double worst = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    const double orig = probe.params()[i];
    probe.mutable_params()[i] = orig + h;
    const double up = loss(probe);
    probe.mutable_params()[i] = orig - h;
    const double down = loss(probe);
    probe.mutable_params()[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]), 1e-6);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

double GradCheck(const LegibilityScorer& model, const TrainExample& example, double h) {
  const auto analytic = MultitaskGradient(model, example);
  return CompareGradients(model, analytic,
                          [&](const LegibilityScorer& m) {
                            return LossMultitask(m.Score(example.x1), m.Score(example.x2),
                                                 example.label);
                          },
                          h);
}

double GradCheckClassify(const LegibilityScorer& model, std::span<const double> x, int y,
                         double h) {
  std::vector<double> analytic(model.params().size(), 0.0);
  const auto trace = model.Forward(x, nullptr);
  model.Backward(trace, Sigmoid(trace.score) - y, analytic);
  return CompareGradients(model, analytic,
                          [&](const LegibilityScorer& m) { return LossClassify(m.Score(x), y); },
                          h);
}

}  // namespace legit
