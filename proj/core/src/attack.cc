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

#include "legit/attack.h"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/image_io.h"
#include "legit/metrics.h"
#include "legit/utf8.h"

namespace legit {

std::vector<CorpusEntry> ParseCorpusJsonl(std::string_view text,
                                          const std::string& default_label) {
  std::vector<CorpusEntry> out;
  size_t start = 0, line_no = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CorpusEntry e;
      e.text = j.at("text").get<std::string>();
      if (j.contains("labels")) {
        for (const auto& [k, v] : j["labels"].items()) {
          e.labels[k] = v.is_boolean() ? v.get<bool>() : v.get<double>() >= 0.5;
        }
      } else if (j.contains("label")) {
        const auto& v = j["label"];
        e.labels[default_label] = v.is_boolean() ? v.get<bool>() : v.get<double>() >= 0.5;
      }
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError,
                  "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CorpusEntry> LoadCorpus(const std::string& path, const std::string& default_label) {
  return ParseCorpusJsonl(ReadFile(path), default_label);
}

std::string Tokens::Join() const {
  std::string out = separators.empty() ? "" : separators[0];
  for (size_t i = 0; i < words.size(); ++i) {
    out += words[i];
    out += separators[i + 1];
  }
  return out;
}

Tokens TokenizeWhitespace(std::string_view text) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  Tokens t;
  size_t i = 0;
  auto take_space = [&] {
    const size_t s = i;
    while (i < text.size() && is_space(text[i])) ++i;
    t.separators.emplace_back(text.substr(s, i - s));
  };
  take_space();
  while (i < text.size()) {
    const size_t s = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    t.words.emplace_back(text.substr(s, i - s));
    take_space();
  }
  return t;
}

// --------------------------------------------------------------------------

namespace {

void AttackSentence(size_t index, const std::string& text, const CorpusAttackConfig& config,
                    const TableMap& tables, const LegibilityFn& legibility,
                    std::string& out_text, std::vector<WordAttack>& out_words) {
  Rng rng(MixSeed(config.seed, index));
  Tokens tokens = TokenizeWhitespace(text);
  for (size_t t = 0; t < tokens.words.size(); ++t) {
    const std::u32string word = DecodeUtf8(tokens.words[t]);
    WordAttack attack;
    attack.sentence = index;
    attack.token = t;
    attack.original = tokens.words[t];
    attack.perturbed = tokens.words[t];
    bool any_eligible = false;
    for (int draw = 0; draw <= config.max_resamples; ++draw) {
      PerturbParams phi = SampleParams(config.prior, config.models, rng);
      if (config.max_k > 0) phi.k = std::min(phi.k, config.max_k);
      const uint64_t seed = rng();
      const auto it = tables.find(phi.model_id);
      if (it == tables.end() || it->second == nullptr) {
        throw Error(ErrorCode::kInvalidArgument, "no neighbor table for model '" + phi.model_id + "'");
      }
      const NeighborTable& table = *it->second;
      std::vector<bool> eligible(word.size());
      bool has = false;
      for (size_t i = 0; i < word.size(); ++i) {
        eligible[i] = word[i] < 0x80 && IsAsciiLetter(static_cast<char>(word[i])) &&
                      table.Contains(word[i]);
        has = has || eligible[i];
      }
      if (!has) break;
      any_eligible = true;
      attack.params = phi;
      const PerturbedWord pw = PerturbWordMasked(word, eligible, phi, table, seed);
      if (pw.perturbed == word) break;  // n too small to change anything
      ++attack.attempts;
      const double score = legibility(word, pw.perturbed);
      if (score > config.threshold) {
        attack.perturbed = EncodeUtf8(pw.perturbed);
        attack.score = score;
        attack.accepted = true;
        break;
      }
    }
    if (attack.accepted) tokens.words[t] = attack.perturbed;
    if (any_eligible) out_words.push_back(std::move(attack));
  }
  out_text = tokens.Join();
}

}  // namespace

PerturbedCorpus PerturbCorpus(const std::vector<std::string>& texts,
                              const CorpusAttackConfig& config, const TableMap& tables,
                              const LegibilityFn& legibility) {
  config.prior.Validate();
  if (config.max_resamples < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_resamples must be >= 0");
  }
  if (config.max_k < 0) throw Error(ErrorCode::kInvalidArgument, "max_k must be >= 0");
  PerturbedCorpus out;
  out.texts.resize(texts.size());
  std::vector<std::vector<WordAttack>> per_sentence(texts.size());
  std::atomic<size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= texts.size()) return;
      try {
        AttackSentence(i, texts[i], config, tables, legibility, out.texts[i], per_sentence[i]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = texts.size();
        return;
      }
    }
  };
  const unsigned workers = std::max(1u, config.threads);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  for (auto& words : per_sentence) {
    for (auto& w : words) out.words.push_back(std::move(w));
  }
  return out;
}

// --------------------------------------------------------------------------

DegradationReport EvaluateVictim(Victim& victim, const std::vector<CorpusEntry>& clean,
                                 const std::vector<std::string>& perturbed, double n) {
  if (clean.size() != perturbed.size()) {
    throw Error(ErrorCode::kInvalidArgument, "clean and perturbed corpora differ in size");
  }
  std::vector<std::string> clean_texts;
  clean_texts.reserve(clean.size());
  for (const auto& e : clean) clean_texts.push_back(e.text);
  const auto clean_scores = victim.Predict(clean_texts);
  const auto pert_scores = clean_texts == perturbed ? clean_scores : victim.Predict(perturbed);

  DegradationReport report;
  report.n = n;
  report.count = clean.size();
  std::map<std::string, bool> names;
  for (const auto& e : clean) {
    for (const auto& [k, v] : e.labels) names[k] = true;
  }
  for (const auto& [label, unused] : names) {
    std::vector<double> cs, ps;
    std::vector<bool> truth;
    for (size_t i = 0; i < clean.size(); ++i) {
      const auto lt = clean[i].labels.find(label);
      if (lt == clean[i].labels.end()) continue;
      const auto c = clean_scores[i].find(label);
      const auto p = pert_scores[i].find(label);
      if (c == clean_scores[i].end() || p == pert_scores[i].end()) {
        throw Error(ErrorCode::kSchemaMismatch, "victim returned no score for label '" + label + "'");
      }
      cs.push_back(c->second);
      ps.push_back(p->second);
      truth.push_back(lt->second);
    }
    auto accuracy = [&](const std::vector<double>& s) {
      size_t right = 0;
      for (size_t i = 0; i < s.size(); ++i) right += (s[i] >= 0.5) == truth[i] ? 1 : 0;
      return s.empty() ? 0.0 : static_cast<double>(right) / s.size();
    };
    LabelMetrics m;
    m.clean_accuracy = accuracy(cs);
    m.perturbed_accuracy = accuracy(ps);
    m.clean_auc = RocAuc(cs, truth);
    m.perturbed_auc = RocAuc(ps, truth);
    report.labels[label] = m;
  }
  for (const auto& [label, m] : report.labels) {
    report.accuracy_drop += m.accuracy_drop();
    report.auc_drop += m.auc_drop();
  }
  if (!report.labels.empty()) {
    report.accuracy_drop /= report.labels.size();
    report.auc_drop /= report.labels.size();
  }
  return report;
}

std::vector<DegradationReport> RunAttackLevels(const std::vector<CorpusEntry>& corpus,
                                               Victim& victim,
                                               const CorpusAttackConfig& base,
                                               const std::vector<double>& levels,
                                               const TableMap& tables,
                                               const LegibilityFn& legibility,
                                               std::vector<PerturbedCorpus>* outputs) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& e : corpus) texts.push_back(e.text);
  std::vector<DegradationReport> reports;
  for (double n : levels) {
    CorpusAttackConfig cfg = base;
    cfg.prior.mu_n = n;
    cfg.prior.var_n = 0.0;
    PerturbedCorpus pc = PerturbCorpus(texts, cfg, tables, legibility);
    reports.push_back(EvaluateVictim(victim, corpus, pc.texts, n));
    if (outputs != nullptr) outputs->push_back(std::move(pc));
  }
  return reports;
}

nlohmann::json ToJson(const DegradationReport& report) {
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [label, m] : report.labels) {
    labels[label] = {{"clean_accuracy", m.clean_accuracy},
                     {"perturbed_accuracy", m.perturbed_accuracy},
                     {"accuracy_drop", m.accuracy_drop()},
                     {"clean_auc", m.clean_auc},
                     {"perturbed_auc", m.perturbed_auc},
                     {"auc_drop", m.auc_drop()}};
  }
  return {{"n", report.n},
          {"count", report.count},
          {"labels", labels},
          {"accuracy_drop", report.accuracy_drop},
          {"auc_drop", report.auc_drop}};
}

std::string DegradationCsv(const std::vector<DegradationReport>& reports) {
  std::string out =
      "n,label,count,clean_accuracy,perturbed_accuracy,accuracy_drop,clean_auc,"
      "perturbed_auc,auc_drop\n";
  char buf[256];
  for (const auto& r : reports) {
    for (const auto& [label, m] : r.labels) {
      std::snprintf(buf, sizeof buf, "%.4g,%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.n,
                    label.c_str(), r.count, m.clean_accuracy, m.perturbed_accuracy,
                    m.accuracy_drop(), m.clean_auc, m.perturbed_auc, m.auc_drop());
      out += buf;
    }
  }
  return out;
}

}  // namespace legit
