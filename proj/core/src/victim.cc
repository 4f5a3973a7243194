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

#include "legit/victim.h"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/image_io.h"
#include "legit/random.h"
#include "legit/scorer.h"

namespace legit {

std::string FormatVictimRequests(const std::vector<std::string>& texts) {
  std::string out;
  for (size_t i = 0; i < texts.size(); ++i) {
    out += nlohmann::json{{"id", i}, {"text", texts[i]}}.dump();
    out += '\n';
  }
  return out;
}

namespace {

LabelScores ParseScores(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("scores") || !j["scores"].is_object()) {
    throw Error(ErrorCode::kSchemaMismatch, "victim response lacks a 'scores' object");
  }
  LabelScores scores;
  for (const auto& [label, value] : j["scores"].items()) {
    if (!value.is_number()) {
      throw Error(ErrorCode::kSchemaMismatch, "score for '" + label + "' is not a number");
    }
    scores[label] = value.get<double>();
  }
  return scores;
}

size_t ParseId(const nlohmann::json& j, size_t count) {
  if (!j.contains("id") || !j["id"].is_number_integer()) {
    throw Error(ErrorCode::kSchemaMismatch, "victim response lacks an integer 'id'");
  }
  const auto id = j["id"].get<int64_t>();
  if (id < 0 || static_cast<size_t>(id) >= count) {
    throw Error(ErrorCode::kSchemaMismatch, "victim response id " + std::to_string(id) +
                                                " out of range");
  }
  return static_cast<size_t>(id);
}

}  // namespace

std::vector<LabelScores> ParseVictimResponses(std::string_view jsonl, size_t count) {
  std::vector<LabelScores> out(count);
  std::vector<bool> seen(count, false);
  size_t start = 0;
  while (start < jsonl.size()) {
    size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaMismatch, std::string("victim response: ") + e.what());
    }
    const size_t id = ParseId(j, count);
    if (seen[id]) {
      throw Error(ErrorCode::kSchemaMismatch, "duplicate victim response id " + std::to_string(id));
    }
    seen[id] = true;
    out[id] = ParseScores(j);
  }
  const auto missing = std::count(seen.begin(), seen.end(), false);
  if (missing > 0) {
    throw Error(ErrorCode::kSchemaMismatch,
                "victim answered " + std::to_string(count - missing) + " of " +
                    std::to_string(count) + " requests");
  }
  return out;
}

// --------------------------------------------------------------------------

namespace {

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

class TempFile {
 public:
  TempFile() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "legit-XXXXXX").string();
    const int fd = mkstemp(tmpl.data());
    if (fd < 0) throw Error(ErrorCode::kIo, "cannot create a temporary file");
    close(fd);
    path_ = tmpl;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

std::vector<LabelScores> SubprocessVictim::Predict(const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  TempFile in, out;
  WriteFile(in.path(), FormatVictimRequests(texts));
  const std::string cmd =
      "(" + command_ + ") < " + ShellQuote(in.path()) + " > " + ShellQuote(out.path());
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    throw Error(ErrorCode::kVictimUnavailable,
                "victim command '" + command_ + "' exited with status " + std::to_string(status));
  }
  return ParseVictimResponses(ReadFile(out.path()), texts.size());
}

HttpVictim::HttpVictim(std::string base_url, unsigned concurrency, double timeout_seconds)
    : base_url_(std::move(base_url)),
      concurrency_(std::max(1u, concurrency)),
      timeout_seconds_(timeout_seconds) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::vector<LabelScores> HttpVictim::Predict(const std::vector<std::string>& texts) {
  std::vector<LabelScores> out(texts.size());
  std::atomic<size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&] {
    httplib::Client client(base_url_);
    const auto secs = static_cast<time_t>(timeout_seconds_);
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    client.set_write_timeout(secs);
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= texts.size()) return;
      try {
        const std::string body = nlohmann::json{{"id", i}, {"text", texts[i]}}.dump();
        auto res = client.Post("/predict", body, "application/json");
        if (!res) {
          throw Error(ErrorCode::kVictimUnavailable,
                      "POST " + base_url_ + "/predict failed: " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
          throw Error(ErrorCode::kVictimUnavailable,
                      "POST " + base_url_ + "/predict returned HTTP " + std::to_string(res->status));
        }
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorCode::kSchemaMismatch, std::string("victim response: ") + e.what());
        }
        if (ParseId(j, texts.size()) != i) {
          throw Error(ErrorCode::kSchemaMismatch, "victim response id does not match request");
        }
        out[i] = ParseScores(j);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = texts.size();
        return;
      }
    }
  };
  const unsigned n = std::min<size_t>(concurrency_, std::max<size_t>(1, texts.size()));
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::unique_ptr<Victim> MakeVictim(std::string_view spec) {
  if (spec.starts_with("cmd:")) {
    return std::make_unique<SubprocessVictim>(std::string(spec.substr(4)));
  }
  if (spec.starts_with("http://") || spec.starts_with("https://")) {
    return std::make_unique<HttpVictim>(std::string(spec));
  }
  if (spec.starts_with("http:")) {
    return std::make_unique<HttpVictim>(std::string(spec.substr(5)));
  }
  throw Error(ErrorCode::kInvalidArgument,
              "victim must be cmd:<command> or http:<url>, got '" + std::string(spec) + "'");
}

// --------------------------------------------------------------------------

namespace {

uint32_t Fnv1a(std::string_view s) {
  uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

}  // namespace

std::vector<std::pair<uint32_t, double>> ToyNgramVictim::Features(std::string_view text) const {
  std::string padded = " ";
  for (char c : text) padded += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  padded += ' ';
  std::map<uint32_t, double> counts;
  for (int n = config_.min_n; n <= config_.max_n; ++n) {
    for (size_t i = 0; i + n <= padded.size(); ++i) {
      const auto gram = std::string_view(padded).substr(i, n);
      counts[Fnv1a(gram) % config_.buckets] += 1.0;
    }
  }
  double norm = 0.0;
  for (const auto& [k, v] : counts) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<std::pair<uint32_t, double>> out(counts.begin(), counts.end());
  if (norm > 0) {
    for (auto& [k, v] : out) v /= norm;
  }
  return out;
}

ToyNgramVictim ToyNgramVictim::Train(const std::vector<std::string>& texts,
                                     const std::vector<bool>& labels,
                                     const ToyVictimConfig& config) {
  if (texts.empty() || texts.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "toy victim needs aligned, nonempty data");
  }
  if (config.min_n < 1 || config.max_n < config.min_n || config.buckets == 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid n-gram configuration");
  }
  ToyNgramVictim v;
  v.config_ = config;
  v.weights_.assign(config.buckets, 0.0);
  std::vector<std::vector<std::pair<uint32_t, double>>> feats;
  feats.reserve(texts.size());
  for (const auto& t : texts) feats.push_back(v.Features(t));
  std::vector<size_t> order(texts.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[UniformIndex(rng, i)]);
    }
    for (size_t idx : order) {
      double z = v.bias_;
      for (const auto& [k, x] : feats[idx]) z += v.weights_[k] * x;
      const double g = Sigmoid(z) - (labels[idx] ? 1.0 : 0.0);
      for (const auto& [k, x] : feats[idx]) {
        v.weights_[k] -= config.learning_rate * (g * x + config.l2 * v.weights_[k]);
      }
      v.bias_ -= config.learning_rate * g;
    }
  }
  return v;
}

double ToyNgramVictim::Probability(std::string_view text) const {
  double z = bias_;
  for (const auto& [k, x] : Features(text)) z += weights_[k] * x;
  return Sigmoid(z);
}

std::vector<LabelScores> ToyNgramVictim::Predict(const std::vector<std::string>& texts) {
  std::vector<LabelScores> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back({{config_.label, Probability(t)}});
  return out;
}

nlohmann::json ToyNgramVictim::ToJson() const {
  // Sparse weights keep the file small.
  nlohmann::json w = nlohmann::json::array();
  for (size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != 0.0) w.push_back({i, weights_[i]});
  }
  return {{"format", "legit-toy-victim"},
          {"min_n", config_.min_n},
          {"max_n", config_.max_n},
          {"buckets", config_.buckets},
          {"label", config_.label},
          {"bias", bias_},
          {"weights", w}};
}

ToyNgramVictim ToyNgramVictim::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("format") != "legit-toy-victim") {
      throw Error(ErrorCode::kFormatError, "not a legit-toy-victim model");
    }
    ToyNgramVictim v;
    v.config_.min_n = j.at("min_n").get<int>();
    v.config_.max_n = j.at("max_n").get<int>();
    v.config_.buckets = j.at("buckets").get<uint32_t>();
    v.config_.label = j.at("label").get<std::string>();
    if (v.config_.buckets == 0) throw Error(ErrorCode::kFormatError, "zero buckets");
    v.bias_ = j.at("bias").get<double>();
    v.weights_.assign(v.config_.buckets, 0.0);
    for (const auto& e : j.at("weights")) {
      const auto idx = e.at(0).get<size_t>();
      if (idx >= v.weights_.size()) throw Error(ErrorCode::kFormatError, "weight index out of range");
      v.weights_[idx] = e.at(1).get<double>();
    }
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("toy victim: ") + e.what());
  }
}

}  // namespace legit
