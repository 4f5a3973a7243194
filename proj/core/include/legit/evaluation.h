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

#ifndef LEGIT_EVALUATION_H_
#define LEGIT_EVALUATION_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "legit/baselines.h"
#include "legit/dataset.h"
#include "legit/metrics.h"
#include "legit/scorer.h"

namespace legit {

// A model for both derived tasks, fitted on the training split.
class TaskModel {
 public:
  virtual ~TaskModel() = default;
  virtual std::string name() const = 0;
  virtual void Fit(const LegitDataset& data) = 0;
  // `hard` marks predictions on the hard classification subset. Only the
  // majority baseline uses it: its hard-subset majority comes from the
  // hard subset of the training split.
  virtual bool PredictLegible(const ClassificationExample& example, bool hard) const = 0;
  virtual int PredictRanking(const RankingExample& example) const = 0;
};

std::unique_ptr<TaskModel> MakeMajorityModel();
// Logistic regression on (n, k) / (n1, k1, n2, k2). With `use_model` the
// embedding model id is one-hot encoded as well.
std::unique_ptr<TaskModel> MakeLogRegModel(bool use_model = false);
// Mean per-character distance: ranking by lower mean, classification by a
// similarity threshold tuned on the training split.
std::unique_ptr<TaskModel> MakeDistanceModel(std::string name, const CharDistance& distance);
// A trained scorer; Fit does nothing.
std::unique_ptr<TaskModel> MakeScorerModel(const LegibilityScorer& scorer,
                                           const FeatureExtractor& extractor);

struct TaskMetrics {
  std::optional<ClassificationMetrics> classification;
  std::optional<ClassificationMetrics> classification_hard;
  std::optional<double> ranking;
  std::optional<double> ranking_hard;
};

enum class EvalTask { kClassification, kRanking, kBoth };

// Hard-subset entries are left empty when the split lacks phi metadata.
TaskMetrics EvaluateModel(const TaskModel& model, const LegitDataset& data, Split split,
                          EvalTask task = EvalTask::kBoth);

nlohmann::json ToJson(const TaskMetrics& metrics);

// Siamese training examples from the resolved pairs of one split.
std::vector<TrainExample> MakeTrainExamples(const LegitDataset& data, Split split,
                                            const FeatureExtractor& extractor);

// Synthetic annotations with a known legibility rule: a perturbation is
// legible when its mean per-character distance to the word is below
// `threshold`. Both legible -> BL, neither -> NL, otherwise the legible
// side wins. Words are split with AssignSplits(vocab, seed).
struct SynthConfig {
  ParamPrior prior1{25.0, 10.0, 0.3, 0.2};
  ParamPrior prior2{25.0, 10.0, 0.7, 0.2};
  std::vector<std::string> models = {"imgdot"};
  double threshold = 0.1;
  size_t pairs_per_word = 1;
  uint64_t seed = 0;
};

std::vector<PairAnnotation> SynthesizeAnnotations(const std::vector<std::string>& vocab,
                                                  const TableMap& tables,
                                                  const CharDistance& distance,
                                                  const SynthConfig& config);

}  // namespace legit

#endif  // LEGIT_EVALUATION_H_
