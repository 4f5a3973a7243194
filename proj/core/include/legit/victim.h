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

#ifndef LEGIT_VICTIM_H_
#define LEGIT_VICTIM_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace legit {

using LabelScores = std::map<std::string, double>;

// Black-box text classifier returning one score per label per input.
class Victim {
 public:
  virtual ~Victim() = default;
  virtual std::string name() const = 0;
  // Throws VictimUnavailable when the model cannot be reached and
  // SchemaMismatch for malformed or misaligned responses.
  virtual std::vector<LabelScores> Predict(const std::vector<std::string>& texts) = 0;
};

// Request and response lines of the victim protocol.
//   request:  {"id": <int>, "text": <string>}
//   response: {"id": <int>, "scores": {<label>: <number>, ...}}
std::string FormatVictimRequests(const std::vector<std::string>& texts);
// Responses may arrive in any order; every id 0..count-1 must appear once.
std::vector<LabelScores> ParseVictimResponses(std::string_view jsonl, size_t count);

// Runs `command` through the shell with the request lines on stdin and
// reads response lines from its stdout. One process per Predict call.
class SubprocessVictim : public Victim {
 public:
  explicit SubprocessVictim(std::string command) : command_(std::move(command)) {}
  std::string name() const override { return "cmd:" + command_; }
  std::vector<LabelScores> Predict(const std::vector<std::string>& texts) override;

 private:
  std::string command_;
};

// POSTs each request object to <base_url>/predict and expects a response
// object in the body. Up to `concurrency` requests are in flight.
class HttpVictim : public Victim {
 public:
  explicit HttpVictim(std::string base_url, unsigned concurrency = 4,
                      double timeout_seconds = 30.0);
  std::string name() const override { return "http:" + base_url_; }
  std::vector<LabelScores> Predict(const std::vector<std::string>& texts) override;

 private:
  std::string base_url_;
  unsigned concurrency_;
  double timeout_seconds_;
};

// Builds a victim from "cmd:<command>" or "http://..." / "http:<url>".
std::unique_ptr<Victim> MakeVictim(std::string_view spec);

// Character n-gram logistic classifier. Features are hashed counts of the
// lowercased text's n-grams (with boundary padding), L2-normalized.
struct ToyVictimConfig {
  int min_n = 2;
  int max_n = 4;
  uint32_t buckets = 1u << 16;
  int epochs = 20;
  double learning_rate = 0.5;
  double l2 = 1e-5;
  uint64_t seed = 0;
  std::string label = "toxic";
};

class ToyNgramVictim : public Victim {
 public:
  static ToyNgramVictim Train(const std::vector<std::string>& texts,
                              const std::vector<bool>& labels,
                              const ToyVictimConfig& config = {});

  std::string name() const override { return "toy-ngram"; }
  std::vector<LabelScores> Predict(const std::vector<std::string>& texts) override;
  double Probability(std::string_view text) const;

  nlohmann::json ToJson() const;
  static ToyNgramVictim FromJson(const nlohmann::json& j);

 private:
  std::vector<std::pair<uint32_t, double>> Features(std::string_view text) const;

  ToyVictimConfig config_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

}  // namespace legit

#endif  // LEGIT_VICTIM_H_
