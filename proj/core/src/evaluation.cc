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

#include "legit/evaluation.h"

#include <set>

#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/utf8.h"

namespace legit {
namespace {

template <typename T>
std::vector<T> OfSplit(const std::vector<T>& all, Split split) {
  std::vector<T> out;
  for (const auto& e : all) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

const PerturbParams& NeedPhi(const std::optional<PerturbParams>& phi) {
  if (!phi) throw Error(ErrorCode::kMissingMetadata, "example has no perturbation parameters");
  return *phi;
}

class MajorityModel : public TaskModel {
 public:
  std::string name() const override { return "baseline:majority"; }
  void Fit(const LegitDataset& data) override {
    const auto train = OfSplit(data.classification, Split::kTrain);
    std_ = MajorityClass::Fit(train);
    try {
      hard_ = MajorityClass::Fit(HardClassificationSubset(train));
    } catch (const Error&) {
      hard_ = std_;
    }
  }
  bool PredictLegible(const ClassificationExample&, bool hard) const override {
    return (hard ? hard_ : std_).PredictLegible();
  }
  int PredictRanking(const RankingExample&) const override { return MajorityClass::PredictRanking(); }

 private:
  MajorityClass std_;
  MajorityClass hard_;
};

class LogRegModel : public TaskModel {
 public:
  explicit LogRegModel(bool use_model) : use_model_(use_model) {}
  std::string name() const override { return "baseline:logreg"; }
  void Fit(const LegitDataset& data) override {
    models_.clear();
    if (use_model_) {
      std::set<std::string> ids;
      for (const auto& e : data.classification) {
        if (e.phi) ids.insert(e.phi->model_id);
      }
      models_.assign(ids.begin(), ids.end());
    }
    std::vector<std::vector<double>> x;
    std::vector<bool> y;
    for (const auto& e : OfSplit(data.classification, Split::kTrain)) {
      x.push_back(PhiFeatures(NeedPhi(e.phi), models_));
      y.push_back(e.legible);
    }
    if (!x.empty()) classify_ = LogisticRegression::Fit(x, y);
    x.clear();
    y.clear();
    for (const auto& e : OfSplit(data.ranking, Split::kTrain)) {
      x.push_back(RankingPhiFeatures(NeedPhi(e.phi1), NeedPhi(e.phi2), models_));
      y.push_back(e.preferred == 1);
    }
    if (!x.empty()) rank_ = LogisticRegression::Fit(x, y);
  }
  bool PredictLegible(const ClassificationExample& e, bool) const override {
    if (!classify_) throw Error(ErrorCode::kInvalidArgument, "logreg classifier not fitted");
    return classify_->Predict(PhiFeatures(NeedPhi(e.phi), models_));
  }
  int PredictRanking(const RankingExample& e) const override {
    if (!rank_) throw Error(ErrorCode::kInvalidArgument, "logreg ranker not fitted");
    return rank_->Predict(RankingPhiFeatures(NeedPhi(e.phi1), NeedPhi(e.phi2), models_)) ? 1 : 2;
  }

 private:
  bool use_model_;
  std::vector<std::string> models_;
  std::optional<LogisticRegression> classify_;
  std::optional<LogisticRegression> rank_;
};

class DistanceModel : public TaskModel {
 public:
  DistanceModel(std::string name, const CharDistance& distance)
      : name_(std::move(name)), distance_(distance) {}
  std::string name() const override { return name_; }
  void Fit(const LegitDataset& data) override {
    std::vector<double> sims;
    std::vector<bool> labels;
    for (const auto& e : OfSplit(data.classification, Split::kTrain)) {
      sims.push_back(Similarity(e));
      labels.push_back(e.legible);
    }
    if (!sims.empty()) threshold_ = ThresholdClassifier::Fit(sims, labels);
  }
  bool PredictLegible(const ClassificationExample& e, bool) const override {
    return threshold_.Predict(Similarity(e));
  }
  int PredictRanking(const RankingExample& e) const override {
    return RankByDistance(distance_, DecodeUtf8(e.word), DecodeUtf8(e.w1), DecodeUtf8(e.w2));
  }

 private:
  double Similarity(const ClassificationExample& e) const {
    return 1.0 - MeanCharDistance(distance_, DecodeUtf8(e.word), DecodeUtf8(e.perturbed));
  }

  std::string name_;
  const CharDistance& distance_;
  ThresholdClassifier threshold_;
};

class ScorerModel : public TaskModel {
 public:
  ScorerModel(const LegibilityScorer& scorer, const FeatureExtractor& extractor)
      : scorer_(scorer), extractor_(extractor) {}
  std::string name() const override { return "scorer"; }
  void Fit(const LegitDataset&) override {}
  bool PredictLegible(const ClassificationExample& e, bool) const override {
    return ClassifyScore(Score(e.word, e.perturbed));
  }
  int PredictRanking(const RankingExample& e) const override {
    return RankScores(Score(e.word, e.w1), Score(e.word, e.w2));
  }

 private:
  double Score(const std::string& w, const std::string& wi) const {
    return scorer_.Score(extractor_.Extract(DecodeUtf8(w), DecodeUtf8(wi)));
  }
  const LegibilityScorer& scorer_;
  const FeatureExtractor& extractor_;
};

ClassificationMetrics Classify(const TaskModel& model,
                               const std::vector<ClassificationExample>& examples, bool hard) {
  std::vector<bool> truth, predicted;
  for (const auto& e : examples) {
    truth.push_back(e.legible);
    predicted.push_back(model.PredictLegible(e, hard));
  }
  return ComputeClassificationMetrics(truth, predicted);
}

double Rank(const TaskModel& model, const std::vector<RankingExample>& examples) {
  std::vector<int> truth, predicted;
  for (const auto& e : examples) {
    truth.push_back(e.preferred);
    predicted.push_back(model.PredictRanking(e));
  }
  return RankingAccuracy(truth, predicted);
}

}  // namespace

std::unique_ptr<TaskModel> MakeMajorityModel() { return std::make_unique<MajorityModel>(); }

std::unique_ptr<TaskModel> MakeLogRegModel(bool use_model) {
  return std::make_unique<LogRegModel>(use_model);
}

std::unique_ptr<TaskModel> MakeDistanceModel(std::string name, const CharDistance& distance) {
  return std::make_unique<DistanceModel>(std::move(name), distance);
}

std::unique_ptr<TaskModel> MakeScorerModel(const LegibilityScorer& scorer,
                                           const FeatureExtractor& extractor) {
  return std::make_unique<ScorerModel>(scorer, extractor);
}

TaskMetrics EvaluateModel(const TaskModel& model, const LegitDataset& data, Split split,
                          EvalTask task) {
  TaskMetrics m;
  if (task != EvalTask::kRanking) {
    const auto examples = OfSplit(data.classification, split);
    m.classification = Classify(model, examples, false);
    try {
      m.classification_hard = Classify(model, HardClassificationSubset(examples), true);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingMetadata) throw;
    }
  }
  if (task != EvalTask::kClassification) {
    const auto examples = OfSplit(data.ranking, split);
    m.ranking = Rank(model, examples);
    try {
      m.ranking_hard = Rank(model, HardRankingSubset(examples));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingMetadata) throw;
    }
  }
  return m;
}

nlohmann::json ToJson(const TaskMetrics& m) {
  nlohmann::json j = nlohmann::json::object();
  if (m.classification) {
    j["classification"]["std"] = ToJson(*m.classification);
    j["classification"]["hard"] =
        m.classification_hard ? ToJson(*m.classification_hard) : nlohmann::json(nullptr);
  }
  if (m.ranking) {
    j["ranking"]["std"] = {{"accuracy", *m.ranking}};
    j["ranking"]["hard"] = m.ranking_hard ? nlohmann::json{{"accuracy", *m.ranking_hard}}
                                          : nlohmann::json(nullptr);
  }
  return j;
}

std::vector<TrainExample> MakeTrainExamples(const LegitDataset& data, Split split,
                                            const FeatureExtractor& extractor) {
  std::vector<TrainExample> out;
  for (const auto& p : data.pairs) {
    if (p.split != split) continue;
    const auto w = DecodeUtf8(p.word);
    out.push_back({extractor.Extract(w, DecodeUtf8(p.w1)), extractor.Extract(w, DecodeUtf8(p.w2)),
                   p.label});
  }
  return out;
}

std::vector<PairAnnotation> SynthesizeAnnotations(const std::vector<std::string>& vocab,
                                                  const TableMap& tables,
                                                  const CharDistance& distance,
                                                  const SynthConfig& config) {
  const SplitSpec splits = AssignSplits(vocab, config.seed);
  Rng rng(MixSeed(config.seed, 0x53594e));
  std::vector<PairAnnotation> out;
  for (const auto& word : vocab) {
    const std::u32string w = DecodeUtf8(word);
    for (size_t r = 0; r < config.pairs_per_word; ++r) {
      const PerturbedPair pair =
          GeneratePair(w, config.prior1, config.prior2, config.models, tables, rng);
      const bool leg1 = MeanCharDistance(distance, w, pair.first.perturbed) < config.threshold;
      const bool leg2 = MeanCharDistance(distance, w, pair.second.perturbed) < config.threshold;
      PairAnnotation a;
      a.pair_id = "synth-" + std::to_string(out.size());
      a.word = word;
      a.w1 = EncodeUtf8(pair.first.perturbed);
      a.w2 = EncodeUtf8(pair.second.perturbed);
      a.phi1 = pair.first.params;
      a.phi2 = pair.second.params;
      a.label = leg1 && leg2 ? Label::kBL : !leg1 && !leg2 ? Label::kNL : leg1 ? Label::kL1 : Label::kL2;
      a.annotator = "synthetic";
      a.split = splits.SplitOf(word);
      out.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace legit
