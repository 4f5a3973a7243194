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

#ifndef LEGIT_ANNOTATION_SERVICE_H_
#define LEGIT_ANNOTATION_SERVICE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "legit/dataset.h"
#include "legit/glyph_atlas.h"
#include "legit/perturber.h"

namespace legit {

// Author-labeled pair used to check annotators.
struct GoldPair {
  std::string word;
  std::string w1;
  std::string w2;
  Label label = Label::kBL;
  bool operator==(const GoldPair&) const = default;
};

std::vector<GoldPair> ParseGoldJsonl(std::string_view text);

struct ServiceConfig {
  std::vector<std::string> vocab;  // filtered with FilterVocab at startup
  std::vector<GoldPair> gold;
  ParamPrior prior1{25.0, 10.0, 0.3, 0.2};
  ParamPrior prior2{25.0, 10.0, 0.7, 0.2};
  AdaptiveConfig adaptive;
  std::vector<std::string> models = {"imgdot"};
  std::array<double, 3> split_fractions{0.65, 0.15, 0.20};
  size_t batch_size = 20;
  double gold_rate = 0.05;
  size_t min_gold_attempts = 10;
  double min_gold_accuracy = 0.70;
  int64_t reservation_ttl_ms = 15 * 60 * 1000;
  size_t test_annotations = 3;
  size_t words_per_round = 0;  // 0 takes every word not yet used
  uint64_t seed = 0;

  void Validate() const;
};

nlohmann::json ToJson(const ServiceConfig& config);
ServiceConfig ServiceConfigFromJson(const nlohmann::json& j);

struct ServicePair {
  std::string id;
  size_t round = 0;
  std::string word;
  std::string w1;
  std::string w2;
  PerturbParams phi1;
  PerturbParams phi2;
  Split split = Split::kTrain;
  size_t required = 1;  // distinct annotators needed
};

struct AnnotatorState {
  std::string id;
  std::string token;
  size_t completed = 0;
  size_t gold_correct = 0;
  size_t gold_attempted = 0;
  bool disqualified = false;
};

struct RoundInfo {
  size_t index = 0;  // 1-based
  ParamPrior prior1;
  ParamPrior prior2;
  bool closed = false;
  size_t pairs = 0;
};

struct BatchItem {
  std::string id;
  std::string image1;  // /img/<id>/1.png
  std::string image2;
};

struct LabelAck {
  size_t completed = 0;
  bool disqualified = false;
};

// Event-sourced state. Every mutation is one JSON event; the state is the
// left fold of Apply over the log, and every query is a function of it.
class ServiceState {
 public:
  // Throws FormatError for a malformed or out-of-order event.
  void Apply(const nlohmann::json& event);

  const ServiceConfig& config() const { return config_; }
  bool initialized() const { return initialized_; }
  uint64_t last_seq() const { return last_seq_; }
  const SplitSpec& splits() const { return splits_; }
  const std::vector<ServicePair>& pairs() const { return pairs_; }
  const std::vector<RoundInfo>& rounds() const { return rounds_; }
  const AnnotatorState* Annotator(const std::string& id) const;
  const AnnotatorState* AnnotatorByToken(const std::string& token) const;
  std::vector<AnnotatorState> Annotators() const;

  // Pair indices annotator `who` may be given at time `now`, in pool order.
  std::vector<size_t> AvailablePairs(const std::string& who, int64_t now) const;
  // Current reservation holders of pair `index` at time `now`.
  size_t ActiveReservations(size_t index, int64_t now) const;
  // Non-voided labels of a pair in log order.
  std::vector<std::pair<std::string, Label>> ValidLabels(size_t index) const;
  // Item lookup for images: (w1, w2) of a pair or gold instance.
  std::optional<std::pair<std::string, std::string>> ItemWords(const std::string& id) const;
  bool IsReservedBy(const std::string& item, const std::string& who, int64_t now) const;
  bool HasLabeled(const std::string& item, const std::string& who) const;

  // Exported annotations (legit dataset JSONL) and summary statistics.
  std::string ExportJsonl() const;
  nlohmann::json ExportStats() const;

  nlohmann::json ToJson() const;
  static ServiceState FromJson(const nlohmann::json& j);

 private:
  struct Reservation {
    std::string annotator;
    int64_t expires = 0;
  };
  struct LabelRecord {
    std::string annotator;
    Label label = Label::kBL;
    bool voided = false;
  };
  struct PairSlot {
    std::vector<Reservation> reservations;
    std::vector<LabelRecord> labels;
  };
  struct GoldInstance {
    std::string id;
    size_t gold = 0;
    std::string annotator;
    int64_t expires = 0;
    bool labeled = false;
  };

  void ApplyInit(const nlohmann::json& e);
  void ApplySession(const nlohmann::json& e);
  void ApplyRoundOpen(const nlohmann::json& e);
  void ApplyRoundClose(const nlohmann::json& e);
  void ApplyBatch(const nlohmann::json& e);
  void ApplyLabel(const nlohmann::json& e);

  bool initialized_ = false;
  uint64_t last_seq_ = 0;
  ServiceConfig config_;
  SplitSpec splits_;
  std::vector<ServicePair> pairs_;
  std::vector<PairSlot> slots_;
  std::map<std::string, size_t> pair_index_;
  std::vector<RoundInfo> rounds_;
  std::map<std::string, AnnotatorState> annotators_;
  std::map<std::string, std::string> tokens_;  // token -> annotator
  std::vector<GoldInstance> gold_instances_;
  std::map<std::string, size_t> gold_index_;
  std::map<std::string, size_t> word_uses_;
};

// Parses a JSONL event log and folds it.
ServiceState ReplayLog(std::string_view log);

// Milliseconds since the Unix epoch.
using Clock = std::function<int64_t()>;
int64_t SystemClockMs();

struct ServiceResources {
  TableMap tables;                       // required to advance rounds
  const GlyphAtlas* atlas = nullptr;     // required to serve images
};

// Live service over an append-only JSONL log. All public methods are
// serialized by one mutex; each mutation appends and flushes one event
// before returning. An existing log is replayed on construction (its init
// event wins over `config`).
class AnnotationService {
 public:
  AnnotationService(ServiceConfig config, ServiceResources resources,
                    std::string log_path = "", Clock clock = SystemClockMs);

  // Idempotent per annotator. Throws Disqualified.
  std::string CreateSession(const std::string& annotator);
  // Throws Unauthorized, Disqualified, NoOpenRound.
  std::vector<BatchItem> GetBatch(const std::string& token);
  // Throws Unauthorized, Disqualified, NotReserved, AlreadyLabeled.
  LabelAck SubmitLabel(const std::string& token, const std::string& item, Label label);
  // Throws RoundOpen while the current round is open.
  RoundInfo AdvanceRound();
  // Throws NoOpenRound.
  RoundInfo CloseRound();

  std::string ExportJsonl() const;
  nlohmann::json ExportStats() const;
  // PNG of side 1 or 2 of an item. Throws NotFound.
  std::string ItemImagePng(const std::string& item, int side) const;

  // Whole log so far, one event per line.
  std::string LogText() const;
  // Writes {"seq": ..., "state": ...}; LoadSnapshot resumes from it plus
  // the log events that follow.
  void SaveSnapshot(const std::string& path) const;
  static ServiceState LoadSnapshot(const std::string& snapshot_path,
                                   std::string_view log);

  ServiceState State() const;

 private:
  void Commit(nlohmann::json event);
  std::string NewToken();

  ServiceResources resources_;
  std::string log_path_;
  Clock clock_;
  mutable std::mutex mu_;
  ServiceState state_;
  std::string log_;
};

}  // namespace legit

#endif  // LEGIT_ANNOTATION_SERVICE_H_
