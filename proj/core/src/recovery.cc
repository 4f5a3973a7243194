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

#include "legit/recovery.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/image_io.h"
#include "legit/porter_stemmer.h"
#include "legit/utf8.h"

namespace legit {

DictionaryRecoverer::DictionaryRecoverer(std::vector<std::string> vocab,
                                         const CharDistance& distance)
    : distance_(distance) {
  if (vocab.empty()) throw Error(ErrorCode::kInvalidArgument, "empty recovery vocabulary");
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  for (const auto& w : vocab) {
    auto u = DecodeUtf8(w);
    by_length_[u.size()].push_back(std::move(u));
  }
}

double DictionaryRecoverer::CharCost(char32_t a, char32_t b) const {
  if (a == b) return 0.0;
  const auto key = std::make_pair(a, b);
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  double d = 1.0;
  if (distance_.Covers(a) && distance_.Covers(b)) {
    try {
      d = distance_.Distance(a, b);
    } catch (const Error&) {
      d = 1.0;
    }
  }
  std::lock_guard lock(cache_mu_);
  cache_[key] = d;
  return d;
}

std::string DictionaryRecoverer::RecoverOne(std::string_view perturbed) const {
  const std::u32string wi = DecodeUtf8(perturbed);
  // Closest available length; the shorter one wins a tie.
  size_t best_len = 0;
  size_t best_gap = std::numeric_limits<size_t>::max();
  for (const auto& [len, words] : by_length_) {
    const size_t gap = len > wi.size() ? len - wi.size() : wi.size() - len;
    if (gap < best_gap) {
      best_gap = gap;
      best_len = len;
    }
  }
  const auto& candidates = by_length_.at(best_len);
  const std::u32string* best = nullptr;
  double best_cost = std::numeric_limits<double>::infinity();
  const size_t longer = std::max(best_len, wi.size());
  for (const auto& w : candidates) {
    double sum = static_cast<double>(longer - std::min(best_len, wi.size()));
    for (size_t i = 0; i < std::min(best_len, wi.size()) && sum < best_cost * longer; ++i) {
      sum += CharCost(w[i], wi[i]);
    }
    const double cost = longer ? sum / longer : 0.0;
    if (cost < best_cost) {  // candidates are sorted, so ties keep the first
      best_cost = cost;
      best = &w;
    }
  }
  return EncodeUtf8(*best);
}

std::vector<std::string> DictionaryRecoverer::Recover(const std::vector<std::string>& perturbed) {
  std::vector<std::string> out;
  out.reserve(perturbed.size());
  for (const auto& w : perturbed) out.push_back(RecoverOne(w));
  return out;
}

std::vector<std::string> ExternalCommandRecoverer::Recover(
    const std::vector<std::string>& perturbed) {
  if (perturbed.empty()) return {};
  const auto dir = std::filesystem::temp_directory_path();
  std::string in_path = (dir / "legit-rec-in-XXXXXX").string();
  std::string out_path = (dir / "legit-rec-out-XXXXXX").string();
  const int fd_in = mkstemp(in_path.data());
  const int fd_out = mkstemp(out_path.data());
  if (fd_in < 0 || fd_out < 0) throw Error(ErrorCode::kIo, "cannot create temporary files");
  close(fd_in);
  close(fd_out);
  struct Cleanup {
    std::string a, b;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove(a, ec);
      std::filesystem::remove(b, ec);
    }
  } cleanup{in_path, out_path};

  std::string requests;
  for (size_t i = 0; i < perturbed.size(); ++i) {
    requests += nlohmann::json{{"id", i}, {"word", perturbed[i]}}.dump() + "\n";
  }
  WriteFile(in_path, requests);
  const std::string cmd = "(" + command_ + ") < '" + in_path + "' > '" + out_path + "'";
  if (const int status = std::system(cmd.c_str()); status != 0) {
    throw Error(ErrorCode::kVictimUnavailable,
                "recoverer command exited with status " + std::to_string(status));
  }
  std::vector<std::string> out(perturbed.size());
  std::vector<bool> seen(perturbed.size(), false);
  const std::string text = ReadFile(out_path);
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto id = j.at("id").get<size_t>();
      if (id >= out.size() || seen[id]) {
        throw Error(ErrorCode::kSchemaMismatch, "bad or duplicate recoverer id");
      }
      seen[id] = true;
      out[id] = j.at("word").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaMismatch, std::string("recoverer response: ") + e.what());
    }
  }
  if (std::count(seen.begin(), seen.end(), false) > 0) {
    throw Error(ErrorCode::kSchemaMismatch, "recoverer did not answer every word");
  }
  return out;
}

std::vector<RecoveryReport> EvaluateRecovery(std::span<const RecoveryPair> pairs,
                                             Recoverer& recoverer, std::vector<double> levels) {
  if (levels.empty()) throw Error(ErrorCode::kInvalidArgument, "no recovery levels");
  std::sort(levels.begin(), levels.end());
  std::vector<RecoveryReport> reports(levels.size());
  for (size_t i = 0; i < levels.size(); ++i) reports[i].n = levels[i];
  std::vector<std::string> perturbed;
  perturbed.reserve(pairs.size());
  for (const auto& p : pairs) perturbed.push_back(p.perturbed);
  const auto guesses = recoverer.Recover(perturbed);
  if (guesses.size() != pairs.size()) {
    throw Error(ErrorCode::kSchemaMismatch, "recoverer returned the wrong number of words");
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    size_t bucket = 0;
    for (size_t b = 1; b < levels.size(); ++b) {
      if (std::abs(pairs[i].n - levels[b]) < std::abs(pairs[i].n - levels[bucket])) bucket = b;
    }
    RecoveryReport& r = reports[bucket];
    ++r.total;
    const std::string truth = AsciiLower(pairs[i].original);
    const std::string guess = AsciiLower(guesses[i]);
    if (guess == truth) ++r.exact;
    if (guess == truth || PorterStem(guess) == PorterStem(truth)) ++r.stem;
  }
  return reports;
}

std::vector<RecoveryPair> GenerateRecoveryPairs(const std::vector<std::string>& vocab,
                                                ParamPrior prior,
                                                const std::vector<double>& levels,
                                                const NeighborTable& table, uint64_t seed) {
  Rng rng(seed);
  std::vector<RecoveryPair> pairs;
  pairs.reserve(vocab.size() * levels.size());
  for (double n : levels) {
    prior.mu_n = n;
    prior.var_n = 0.0;
    for (const auto& w : vocab) {
      const PerturbParams phi = SampleParams(prior, {table.model_id()}, rng);
      const auto pw = PerturbWord(DecodeUtf8(w), phi, table, rng());
      pairs.push_back({w, EncodeUtf8(pw.perturbed), n});
    }
  }
  return pairs;
}

nlohmann::json ToJson(const RecoveryReport& report) {
  return {{"n", report.n},
          {"total", report.total},
          {"exact", report.exact},
          {"stem", report.stem},
          {"accuracy", report.accuracy()},
          {"exact_accuracy", report.exact_accuracy()}};
}

}  // namespace legit
