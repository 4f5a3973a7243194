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

#include "legit/annotation_service.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "legit/error.h"
#include "legit/image_io.h"
#include "legit/utf8.h"

namespace legit {

using nlohmann::json;

std::vector<GoldPair> ParseGoldJsonl(std::string_view text) {
  std::vector<GoldPair> out;
  size_t start = 0, line_no = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("word").get<std::string>(), j.at("w1").get<std::string>(),
                     j.at("w2").get<std::string>(), ParseLabel(j.at("label").get<std::string>())});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormatError, "gold line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void ServiceConfig::Validate() const {
  prior1.Validate();
  prior2.Validate();
  if (models.empty()) throw Error(ErrorCode::kInvalidArgument, "no perturbation models");
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  if (gold_rate < 0.0 || gold_rate > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "gold_rate must be in [0, 1]");
  }
  if (min_gold_accuracy < 0.0 || min_gold_accuracy > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "min_gold_accuracy must be in [0, 1]");
  }
  if (test_annotations == 0 || reservation_ttl_ms <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "test_annotations and reservation TTL must be positive");
  }
}

json ToJson(const ServiceConfig& c) {
  json gold = json::array();
  for (const auto& g : c.gold) {
    gold.push_back({{"word", g.word}, {"w1", g.w1}, {"w2", g.w2}, {"label", LabelName(g.label)}});
  }
  return {{"vocab", c.vocab},
          {"gold", gold},
          {"prior1", ToJson(c.prior1)},
          {"prior2", ToJson(c.prior2)},
          {"adaptive",
           {{"alpha", c.adaptive.alpha},
            {"beta", c.adaptive.beta},
            {"var_min_n", c.adaptive.var_min_n},
            {"var_min_k", c.adaptive.var_min_k}}},
          {"models", c.models},
          {"split_fractions", c.split_fractions},
          {"batch_size", c.batch_size},
          {"gold_rate", c.gold_rate},
          {"min_gold_attempts", c.min_gold_attempts},
          {"min_gold_accuracy", c.min_gold_accuracy},
          {"reservation_ttl_ms", c.reservation_ttl_ms},
          {"test_annotations", c.test_annotations},
          {"words_per_round", c.words_per_round},
          {"seed", c.seed}};
}

ServiceConfig ServiceConfigFromJson(const json& j) {
  ServiceConfig c;
  c.vocab = j.at("vocab").get<std::vector<std::string>>();
  for (const auto& g : j.at("gold")) {
    c.gold.push_back({g.at("word").get<std::string>(), g.at("w1").get<std::string>(),
                      g.at("w2").get<std::string>(), ParseLabel(g.at("label").get<std::string>())});
  }
  c.prior1 = ParamPriorFromJson(j.at("prior1"));
  c.prior2 = ParamPriorFromJson(j.at("prior2"));
  const auto& a = j.at("adaptive");
  c.adaptive = {a.at("alpha").get<double>(), a.at("beta").get<double>(),
                a.at("var_min_n").get<double>(), a.at("var_min_k").get<double>()};
  c.models = j.at("models").get<std::vector<std::string>>();
  c.split_fractions = j.at("split_fractions").get<std::array<double, 3>>();
  c.batch_size = j.at("batch_size").get<size_t>();
  c.gold_rate = j.at("gold_rate").get<double>();
  c.min_gold_attempts = j.at("min_gold_attempts").get<size_t>();
  c.min_gold_accuracy = j.at("min_gold_accuracy").get<double>();
  c.reservation_ttl_ms = j.at("reservation_ttl_ms").get<int64_t>();
  c.test_annotations = j.at("test_annotations").get<size_t>();
  c.words_per_round = j.at("words_per_round").get<size_t>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

namespace {

json PairToJson(const ServicePair& p) {
  return {{"id", p.id},       {"round", p.round},   {"word", p.word},
          {"w1", p.w1},       {"w2", p.w2},         {"phi1", ToJson(p.phi1)},
          {"phi2", ToJson(p.phi2)}, {"split", SplitName(p.split)}, {"required", p.required}};
}

ServicePair PairFromJson(const json& j) {
  ServicePair p;
  p.id = j.at("id").get<std::string>();
  p.round = j.at("round").get<size_t>();
  p.word = j.at("word").get<std::string>();
  p.w1 = j.at("w1").get<std::string>();
  p.w2 = j.at("w2").get<std::string>();
  p.phi1 = PerturbParamsFromJson(j.at("phi1"));
  p.phi2 = PerturbParamsFromJson(j.at("phi2"));
  p.split = ParseSplit(j.at("split").get<std::string>());
  p.required = j.at("required").get<size_t>();
  return p;
}

std::string HexId(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

[[noreturn]] void BadEvent(const std::string& what) {
  throw Error(ErrorCode::kFormatError, "event log: " + what);
}

}  // namespace

// --------------------------------------------------------------------------
// State

void ServiceState::Apply(const json& e) {
  try {
    const uint64_t seq = e.at("seq").get<uint64_t>();
    if (seq != last_seq_ + 1) {
      BadEvent("expected seq " + std::to_string(last_seq_ + 1) + ", got " + std::to_string(seq));
    }
    const std::string type = e.at("type").get<std::string>();
    if (!initialized_ && type != "init") BadEvent("first event must be init");
    if (type == "init") {
      ApplyInit(e);
    } else if (type == "session") {
      ApplySession(e);
    } else if (type == "round_open") {
      ApplyRoundOpen(e);
    } else if (type == "round_close") {
      ApplyRoundClose(e);
    } else if (type == "batch") {
      ApplyBatch(e);
    } else if (type == "label") {
      ApplyLabel(e);
    } else {
      BadEvent("unknown event type '" + type + "'");
    }
    last_seq_ = seq;
  } catch (const json::exception& ex) {
    BadEvent(ex.what());
  }
}

void ServiceState::ApplyInit(const json& e) {
  if (initialized_) BadEvent("duplicate init");
  config_ = ServiceConfigFromJson(e.at("config"));
  const auto& s = e.at("splits");
  splits_.train = s.at("train").get<std::vector<std::string>>();
  splits_.val = s.at("val").get<std::vector<std::string>>();
  splits_.test = s.at("test").get<std::vector<std::string>>();
  splits_.fractions = config_.split_fractions;
  initialized_ = true;
}

void ServiceState::ApplySession(const json& e) {
  const auto who = e.at("annotator").get<std::string>();
  const auto token = e.at("token").get<std::string>();
  auto& a = annotators_[who];
  if (!a.token.empty()) tokens_.erase(a.token);
  a.id = who;
  a.token = token;
  tokens_[token] = who;
}

void ServiceState::ApplyRoundOpen(const json& e) {
  if (!rounds_.empty() && !rounds_.back().closed) BadEvent("round opened while another is open");
  RoundInfo r;
  r.index = e.at("round").get<size_t>();
  if (r.index != rounds_.size() + 1) BadEvent("round index out of order");
  r.prior1 = ParamPriorFromJson(e.at("prior1"));
  r.prior2 = ParamPriorFromJson(e.at("prior2"));
  for (const auto& pj : e.at("pairs")) {
    ServicePair p = PairFromJson(pj);
    if (pair_index_.count(p.id)) BadEvent("duplicate pair id " + p.id);
    pair_index_[p.id] = pairs_.size();
    ++word_uses_[p.word];
    pairs_.push_back(std::move(p));
    slots_.emplace_back();
    ++r.pairs;
  }
  rounds_.push_back(r);
}

void ServiceState::ApplyRoundClose(const json& e) {
  if (rounds_.empty() || rounds_.back().closed) BadEvent("no open round to close");
  if (e.at("round").get<size_t>() != rounds_.back().index) BadEvent("closing the wrong round");
  rounds_.back().closed = true;
}

void ServiceState::ApplyBatch(const json& e) {
  const auto who = e.at("annotator").get<std::string>();
  if (!annotators_.count(who)) BadEvent("batch for unknown annotator " + who);
  const int64_t expires = e.at("expires").get<int64_t>();
  for (const auto& item : e.at("items")) {
    const auto id = item.at("id").get<std::string>();
    if (item.contains("gold")) {
      const auto g = item.at("gold").get<size_t>();
      if (g >= config_.gold.size()) BadEvent("gold index out of range");
      if (gold_index_.count(id) || pair_index_.count(id)) BadEvent("duplicate item id " + id);
      gold_index_[id] = gold_instances_.size();
      gold_instances_.push_back({id, g, who, expires, false});
    } else {
      const auto it = pair_index_.find(id);
      if (it == pair_index_.end()) BadEvent("batch names unknown pair " + id);
      slots_[it->second].reservations.push_back({who, expires});
    }
  }
}

void ServiceState::ApplyLabel(const json& e) {
  const auto who = e.at("annotator").get<std::string>();
  const auto id = e.at("item").get<std::string>();
  const Label label = ParseLabel(e.at("label").get<std::string>());
  auto ait = annotators_.find(who);
  if (ait == annotators_.end()) BadEvent("label from unknown annotator " + who);
  AnnotatorState& a = ait->second;
  if (a.disqualified) BadEvent("label from disqualified annotator " + who);
  ++a.completed;
  if (auto git = gold_index_.find(id); git != gold_index_.end()) {
    GoldInstance& g = gold_instances_[git->second];
    if (g.annotator != who || g.labeled) BadEvent("gold item " + id + " not open for " + who);
    g.labeled = true;
    ++a.gold_attempted;
    if (config_.gold[g.gold].label == label) ++a.gold_correct;
    if (a.gold_attempted >= config_.min_gold_attempts &&
        static_cast<double>(a.gold_correct) <
            config_.min_gold_accuracy * static_cast<double>(a.gold_attempted)) {
      a.disqualified = true;
      for (auto& slot : slots_) {
        for (auto& l : slot.labels) {
          if (l.annotator == who) l.voided = true;
        }
      }
    }
    return;
  }
  const auto pit = pair_index_.find(id);
  if (pit == pair_index_.end()) BadEvent("label for unknown item " + id);
  PairSlot& slot = slots_[pit->second];
  for (const auto& l : slot.labels) {
    if (l.annotator == who) BadEvent("second label by " + who + " for " + id);
  }
  slot.labels.push_back({who, label, false});
  std::erase_if(slot.reservations, [&](const Reservation& r) { return r.annotator == who; });
}

const AnnotatorState* ServiceState::Annotator(const std::string& id) const {
  const auto it = annotators_.find(id);
  return it == annotators_.end() ? nullptr : &it->second;
}

const AnnotatorState* ServiceState::AnnotatorByToken(const std::string& token) const {
  const auto it = tokens_.find(token);
  return it == tokens_.end() ? nullptr : Annotator(it->second);
}

std::vector<AnnotatorState> ServiceState::Annotators() const {
  std::vector<AnnotatorState> out;
  for (const auto& [id, a] : annotators_) out.push_back(a);
  return out;
}

size_t ServiceState::ActiveReservations(size_t index, int64_t now) const {
  size_t n = 0;
  for (const auto& r : slots_[index].reservations) {
    if (r.expires <= now) continue;
    const AnnotatorState* a = Annotator(r.annotator);
    if (a != nullptr && !a->disqualified) ++n;
  }
  return n;
}

std::vector<std::pair<std::string, Label>> ServiceState::ValidLabels(size_t index) const {
  std::vector<std::pair<std::string, Label>> out;
  for (const auto& l : slots_[index].labels) {
    if (!l.voided) out.emplace_back(l.annotator, l.label);
  }
  return out;
}

std::vector<size_t> ServiceState::AvailablePairs(const std::string& who, int64_t now) const {
  std::vector<size_t> out;
  if (rounds_.empty() || rounds_.back().closed) return out;
  const size_t round = rounds_.back().index;
  for (size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].round != round) continue;
    const PairSlot& slot = slots_[i];
    bool mine = false;
    for (const auto& l : slot.labels) mine = mine || l.annotator == who;
    for (const auto& r : slot.reservations) mine = mine || (r.annotator == who && r.expires > now);
    if (mine) continue;
    size_t valid = 0;
    for (const auto& l : slot.labels) valid += l.voided ? 0 : 1;
    if (valid + ActiveReservations(i, now) < pairs_[i].required) out.push_back(i);
  }
  return out;
}

std::optional<std::pair<std::string, std::string>> ServiceState::ItemWords(
    const std::string& id) const {
  if (auto it = pair_index_.find(id); it != pair_index_.end()) {
    return std::make_pair(pairs_[it->second].w1, pairs_[it->second].w2);
  }
  if (auto it = gold_index_.find(id); it != gold_index_.end()) {
    const GoldPair& g = config_.gold[gold_instances_[it->second].gold];
    return std::make_pair(g.w1, g.w2);
  }
  return std::nullopt;
}

bool ServiceState::IsReservedBy(const std::string& item, const std::string& who,
                                int64_t now) const {
  if (auto it = gold_index_.find(item); it != gold_index_.end()) {
    const GoldInstance& g = gold_instances_[it->second];
    return g.annotator == who && !g.labeled && g.expires > now;
  }
  if (auto it = pair_index_.find(item); it != pair_index_.end()) {
    for (const auto& r : slots_[it->second].reservations) {
      if (r.annotator == who && r.expires > now) return true;
    }
  }
  return false;
}

bool ServiceState::HasLabeled(const std::string& item, const std::string& who) const {
  if (auto it = gold_index_.find(item); it != gold_index_.end()) {
    const GoldInstance& g = gold_instances_[it->second];
    return g.annotator == who && g.labeled;
  }
  if (auto it = pair_index_.find(item); it != pair_index_.end()) {
    for (const auto& l : slots_[it->second].labels) {
      if (l.annotator == who) return true;
    }
  }
  return false;
}

namespace {

PairAnnotation ToAnnotation(const ServicePair& p, const std::string& who, Label label) {
  PairAnnotation a;
  a.pair_id = p.id;
  a.word = p.word;
  a.w1 = p.w1;
  a.w2 = p.w2;
  a.phi1 = p.phi1;
  a.phi2 = p.phi2;
  a.label = label;
  a.annotator = who;
  a.split = p.split;
  return a;
}

bool AllDistinct(const std::vector<std::pair<std::string, Label>>& labels) {
  std::set<Label> seen;
  for (const auto& [who, l] : labels) seen.insert(l);
  return seen.size() == labels.size();
}

}  // namespace

std::string ServiceState::ExportJsonl() const {
  std::vector<PairAnnotation> out;
  for (size_t i = 0; i < pairs_.size(); ++i) {
    auto labels = ValidLabels(i);
    const ServicePair& p = pairs_[i];
    if (labels.size() < p.required) continue;
    labels.resize(p.required);
    if (p.required >= 3 && AllDistinct(labels)) continue;
    for (const auto& [who, l] : labels) out.push_back(ToAnnotation(p, who, l));
  }
  return FormatAnnotationsJsonl(out);
}

json ServiceState::ExportStats() const {
  size_t labels = 0, complete = 0, exported = 0, dropped = 0;
  std::vector<PairAnnotation> triples;
  for (size_t i = 0; i < pairs_.size(); ++i) {
    auto valid = ValidLabels(i);
    labels += valid.size();
    const ServicePair& p = pairs_[i];
    if (valid.size() < p.required) continue;
    ++complete;
    valid.resize(p.required);
    if (p.required == 3) {
      for (const auto& [who, l] : valid) triples.push_back(ToAnnotation(p, who, l));
    }
    if (p.required >= 3 && AllDistinct(valid)) {
      ++dropped;
    } else {
      exported += valid.size();
    }
  }
  json agreement = {{"pairs", 0}, {"all", 0.0}, {"two", 0.0}, {"none", 0.0}};
  if (!triples.empty()) {
    const AgreementStats s = ComputeAgreement(triples);
    agreement = {{"pairs", s.pairs}, {"all", s.all_agree}, {"two", s.two_agree},
                 {"none", s.none_agree}};
  }
  size_t disqualified = 0;
  for (const auto& [id, a] : annotators_) disqualified += a.disqualified ? 1 : 0;
  return {{"rounds", rounds_.size()},
          {"pairs", pairs_.size()},
          {"labels", labels},
          {"complete_pairs", complete},
          {"exported_annotations", exported},
          {"dropped_test_pairs", dropped},
          {"test_agreement", agreement},
          {"annotators", annotators_.size()},
          {"disqualified", disqualified}};
}

json ServiceState::ToJson() const {
  json pairs = json::array();
  for (size_t i = 0; i < pairs_.size(); ++i) {
    json p = PairToJson(pairs_[i]);
    json res = json::array(), labels = json::array();
    for (const auto& r : slots_[i].reservations) res.push_back({r.annotator, r.expires});
    for (const auto& l : slots_[i].labels) {
      labels.push_back({l.annotator, LabelName(l.label), l.voided});
    }
    p["reservations"] = res;
    p["labels"] = labels;
    pairs.push_back(p);
  }
  json rounds = json::array();
  for (const auto& r : rounds_) {
    rounds.push_back({{"index", r.index}, {"prior1", legit::ToJson(r.prior1)},
                      {"prior2", legit::ToJson(r.prior2)}, {"closed", r.closed},
                      {"pairs", r.pairs}});
  }
  json annotators = json::array();
  for (const auto& [id, a] : annotators_) {
    annotators.push_back({{"id", a.id}, {"token", a.token}, {"completed", a.completed},
                          {"gold_correct", a.gold_correct},
                          {"gold_attempted", a.gold_attempted},
                          {"disqualified", a.disqualified}});
  }
  json gold = json::array();
  for (const auto& g : gold_instances_) {
    gold.push_back({g.id, g.gold, g.annotator, g.expires, g.labeled});
  }
  return {{"seq", last_seq_},
          {"config", legit::ToJson(config_)},
          {"splits", {{"train", splits_.train}, {"val", splits_.val}, {"test", splits_.test}}},
          {"pairs", pairs},
          {"rounds", rounds},
          {"annotators", annotators},
          {"gold_instances", gold}};
}

ServiceState ServiceState::FromJson(const json& j) {
  try {
    ServiceState s;
    s.initialized_ = true;
    s.last_seq_ = j.at("seq").get<uint64_t>();
    s.config_ = ServiceConfigFromJson(j.at("config"));
    s.splits_.train = j.at("splits").at("train").get<std::vector<std::string>>();
    s.splits_.val = j.at("splits").at("val").get<std::vector<std::string>>();
    s.splits_.test = j.at("splits").at("test").get<std::vector<std::string>>();
    s.splits_.fractions = s.config_.split_fractions;
    for (const auto& pj : j.at("pairs")) {
      ServicePair p = PairFromJson(pj);
      PairSlot slot;
      for (const auto& r : pj.at("reservations")) {
        slot.reservations.push_back({r.at(0).get<std::string>(), r.at(1).get<int64_t>()});
      }
      for (const auto& l : pj.at("labels")) {
        slot.labels.push_back({l.at(0).get<std::string>(), ParseLabel(l.at(1).get<std::string>()),
                               l.at(2).get<bool>()});
      }
      s.pair_index_[p.id] = s.pairs_.size();
      ++s.word_uses_[p.word];
      s.pairs_.push_back(std::move(p));
      s.slots_.push_back(std::move(slot));
    }
    for (const auto& r : j.at("rounds")) {
      s.rounds_.push_back({r.at("index").get<size_t>(), ParamPriorFromJson(r.at("prior1")),
                           ParamPriorFromJson(r.at("prior2")), r.at("closed").get<bool>(),
                           r.at("pairs").get<size_t>()});
    }
    for (const auto& a : j.at("annotators")) {
      AnnotatorState st;
      st.id = a.at("id").get<std::string>();
      st.token = a.at("token").get<std::string>();
      st.completed = a.at("completed").get<size_t>();
      st.gold_correct = a.at("gold_correct").get<size_t>();
      st.gold_attempted = a.at("gold_attempted").get<size_t>();
      st.disqualified = a.at("disqualified").get<bool>();
      s.tokens_[st.token] = st.id;
      s.annotators_[st.id] = st;
    }
    for (const auto& g : j.at("gold_instances")) {
      GoldInstance gi{g.at(0).get<std::string>(), g.at(1).get<size_t>(),
                      g.at(2).get<std::string>(), g.at(3).get<int64_t>(), g.at(4).get<bool>()};
      s.gold_index_[gi.id] = s.gold_instances_.size();
      s.gold_instances_.push_back(gi);
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("service snapshot: ") + e.what());
  }
}

namespace {

template <typename Fn>
void ForEachLine(std::string_view text, Fn fn) {
  size_t start = 0, line_no = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json e;
    try {
      e = json::parse(line);
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kFormatError,
                  "event log line " + std::to_string(line_no) + ": " + ex.what());
    }
    fn(e);
  }
}

}  // namespace

ServiceState ReplayLog(std::string_view log) {
  ServiceState state;
  ForEachLine(log, [&](const json& e) { state.Apply(e); });
  return state;
}

int64_t SystemClockMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// --------------------------------------------------------------------------
// Live service

AnnotationService::AnnotationService(ServiceConfig config, ServiceResources resources,
                                     std::string log_path, Clock clock)
    : resources_(std::move(resources)), log_path_(std::move(log_path)), clock_(std::move(clock)) {
  if (!log_path_.empty() && std::filesystem::exists(log_path_) &&
      std::filesystem::file_size(log_path_) > 0) {
    log_ = ReadFile(log_path_);
    if (log_.back() != '\n') log_ += '\n';
    state_ = ReplayLog(log_);
    return;
  }
  config.Validate();
  config.vocab = FilterVocab(config.vocab);
  const SplitSpec splits = AssignSplits(config.vocab, config.seed, config.split_fractions);
  Commit({{"type", "init"},
          {"config", legit::ToJson(config)},
          {"splits", {{"train", splits.train}, {"val", splits.val}, {"test", splits.test}}}});
}

void AnnotationService::Commit(json event) {
  event["seq"] = state_.last_seq() + 1;
  if (!event.contains("time")) event["time"] = clock_();
  const std::string line = event.dump() + "\n";
  if (!log_path_.empty()) {
    std::ofstream out(log_path_, std::ios::app | std::ios::binary);
    out << line;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot append to " + log_path_);
  }
  state_.Apply(event);
  log_ += line;
}

std::string AnnotationService::NewToken() {
  std::random_device rd;
  std::string token;
  for (int i = 0; i < 4; ++i) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
    token += buf;
  }
  return token;
}

std::string AnnotationService::CreateSession(const std::string& annotator) {
  std::lock_guard lock(mu_);
  if (annotator.empty() || annotator.size() > 128) {
    throw Error(ErrorCode::kInvalidArgument, "annotator id must have 1..128 characters");
  }
  if (const AnnotatorState* a = state_.Annotator(annotator)) {
    if (a->disqualified) throw Error(ErrorCode::kDisqualified, annotator + " is disqualified");
    return a->token;
  }
  std::string token = NewToken();
  while (state_.AnnotatorByToken(token) != nullptr) token = NewToken();
  Commit({{"type", "session"}, {"annotator", annotator}, {"token", token}});
  return token;
}

namespace {

const AnnotatorState& Authorize(const ServiceState& state, const std::string& token) {
  const AnnotatorState* a = state.AnnotatorByToken(token);
  if (a == nullptr) throw Error(ErrorCode::kUnauthorized, "unknown session token");
  if (a->disqualified) throw Error(ErrorCode::kDisqualified, a->id + " is disqualified");
  return *a;
}

std::string ImageUrl(const std::string& id, int side) {
  return "/img/" + id + "/" + std::to_string(side) + ".png";
}

}  // namespace

std::vector<BatchItem> AnnotationService::GetBatch(const std::string& token) {
  std::lock_guard lock(mu_);
  const int64_t now = clock_();
  const AnnotatorState& who = Authorize(state_, token);
  const auto& rounds = state_.rounds();
  if (rounds.empty() || rounds.back().closed) {
    throw Error(ErrorCode::kNoOpenRound, "no annotation round is open");
  }
  const ServiceConfig& cfg = state_.config();
  Rng rng(MixSeed(cfg.seed, state_.last_seq() + 1));
  size_t gold = 0;
  if (!cfg.gold.empty()) {
    for (size_t i = 0; i < cfg.batch_size; ++i) gold += Bernoulli(rng, cfg.gold_rate) ? 1 : 0;
    gold = std::min(gold, cfg.gold.size());
  }
  const auto available = state_.AvailablePairs(who.id, now);
  const size_t take = std::min(cfg.batch_size - gold, available.size());
  if (take == 0) return {};

  json items = json::array();
  for (size_t i = 0; i < take; ++i) items.push_back({{"id", state_.pairs()[available[i]].id}});
  std::vector<size_t> gold_pick(cfg.gold.size());
  for (size_t i = 0; i < gold_pick.size(); ++i) gold_pick[i] = i;
  for (size_t i = 0; i < gold; ++i) {
    std::swap(gold_pick[i], gold_pick[i + UniformIndex(rng, gold_pick.size() - i)]);
    std::string id = HexId(rng());
    while (state_.ItemWords(id).has_value()) id = HexId(rng());
    items.push_back({{"id", id}, {"gold", gold_pick[i]}});
  }
  for (size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[UniformIndex(rng, i)]);
  }
  Commit({{"type", "batch"},
          {"annotator", who.id},
          {"expires", now + cfg.reservation_ttl_ms},
          {"items", items},
          {"time", now}});
  std::vector<BatchItem> out;
  for (const auto& item : items) {
    const auto id = item.at("id").get<std::string>();
    out.push_back({id, ImageUrl(id, 1), ImageUrl(id, 2)});
  }
  return out;
}

LabelAck AnnotationService::SubmitLabel(const std::string& token, const std::string& item,
                                        Label label) {
  std::lock_guard lock(mu_);
  const int64_t now = clock_();
  const AnnotatorState& who = Authorize(state_, token);
  const std::string id = who.id;
  if (state_.HasLabeled(item, id)) {
    throw Error(ErrorCode::kAlreadyLabeled, id + " already labeled " + item);
  }
  if (!state_.IsReservedBy(item, id, now)) {
    throw Error(ErrorCode::kNotReserved, item + " is not reserved by " + id);
  }
  Commit({{"type", "label"},
          {"annotator", id},
          {"item", item},
          {"label", LabelName(label)},
          {"time", now}});
  const AnnotatorState* after = state_.Annotator(id);
  return {after->completed, after->disqualified};
}

RoundInfo AnnotationService::AdvanceRound() {
  std::lock_guard lock(mu_);
  const auto& rounds = state_.rounds();
  if (!rounds.empty() && !rounds.back().closed) {
    throw Error(ErrorCode::kRoundOpen, "round " + std::to_string(rounds.back().index) + " is open");
  }
  const ServiceConfig& cfg = state_.config();
  for (const auto& m : cfg.models) {
    const auto it = resources_.tables.find(m);
    if (it == resources_.tables.end() || it->second == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "no neighbor table for model '" + m + "'");
    }
  }
  ParamPrior p1 = cfg.prior1, p2 = cfg.prior2;
  if (!rounds.empty()) std::tie(p1, p2) = AdaptiveUpdate(rounds.back().prior1, rounds.back().prior2, cfg.adaptive);
  const size_t index = rounds.size() + 1;
  Rng rng(MixSeed(cfg.seed, state_.last_seq() + 1));

  // Unused words first, each group in seeded random order.
  std::vector<std::string> fresh, used;
  std::set<std::string> seen_words;
  for (const auto& p : state_.pairs()) seen_words.insert(p.word);
  for (const auto& w : cfg.vocab) (seen_words.count(w) ? used : fresh).push_back(w);
  auto shuffle = [&](std::vector<std::string>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[UniformIndex(rng, i)]);
  };
  shuffle(fresh);
  shuffle(used);
  std::vector<std::string> words = fresh;
  if (cfg.words_per_round == 0) {
    if (words.empty()) words = used;
  } else {
    for (size_t i = 0; words.size() < cfg.words_per_round && i < used.size(); ++i) {
      words.push_back(used[i]);
    }
    if (words.size() > cfg.words_per_round) words.resize(cfg.words_per_round);
  }

  json pairs = json::array();
  const size_t base = state_.pairs().size();
  for (const auto& w : words) {
    const std::u32string word = DecodeUtf8(w);
    std::optional<PerturbedPair> pair;
    for (int attempt = 0; attempt < 10 && !pair; ++attempt) {
      PerturbedPair candidate = GeneratePair(word, p1, p2, cfg.models, resources_.tables, rng);
      if (!candidate.collision) pair = std::move(candidate);
    }
    if (!pair) continue;
    ServicePair sp;
    sp.id = HexId(MixSeed(cfg.seed ^ 0x7061697273ULL, base + pairs.size()));
    sp.round = index;
    sp.word = w;
    sp.w1 = EncodeUtf8(pair->first.perturbed);
    sp.w2 = EncodeUtf8(pair->second.perturbed);
    sp.phi1 = pair->first.params;
    sp.phi2 = pair->second.params;
    sp.split = state_.splits().SplitOf(w);
    sp.required = sp.split == Split::kTest ? cfg.test_annotations : 1;
    pairs.push_back(PairToJson(sp));
  }
  Commit({{"type", "round_open"},
          {"round", index},
          {"prior1", legit::ToJson(p1)},
          {"prior2", legit::ToJson(p2)},
          {"pairs", pairs}});
  return state_.rounds().back();
}

RoundInfo AnnotationService::CloseRound() {
  std::lock_guard lock(mu_);
  const auto& rounds = state_.rounds();
  if (rounds.empty() || rounds.back().closed) {
    throw Error(ErrorCode::kNoOpenRound, "no annotation round is open");
  }
  Commit({{"type", "round_close"}, {"round", rounds.back().index}});
  return state_.rounds().back();
}

std::string AnnotationService::ExportJsonl() const {
  std::lock_guard lock(mu_);
  return state_.ExportJsonl();
}

json AnnotationService::ExportStats() const {
  std::lock_guard lock(mu_);
  return state_.ExportStats();
}

std::string AnnotationService::ItemImagePng(const std::string& item, int side) const {
  std::optional<std::pair<std::string, std::string>> words;
  {
    std::lock_guard lock(mu_);
    words = state_.ItemWords(item);
  }
  if (!words || (side != 1 && side != 2)) throw Error(ErrorCode::kNotFound, "no image " + item);
  if (resources_.atlas == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "service has no glyph atlas");
  }
  return EncodePng(resources_.atlas->RenderString(DecodeUtf8(side == 1 ? words->first : words->second)));
}

std::string AnnotationService::LogText() const {
  std::lock_guard lock(mu_);
  return log_;
}

void AnnotationService::SaveSnapshot(const std::string& path) const {
  json snap;
  {
    std::lock_guard lock(mu_);
    snap = state_.ToJson();
  }
  const std::string tmp = path + ".tmp";
  WriteFile(tmp, snap.dump() + "\n");
  std::filesystem::rename(tmp, path);
}

ServiceState AnnotationService::LoadSnapshot(const std::string& snapshot_path,
                                             std::string_view log) {
  json j;
  try {
    j = json::parse(ReadFile(snapshot_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, snapshot_path + ": " + e.what());
  }
  ServiceState state = ServiceState::FromJson(j);
  const uint64_t from = state.last_seq();
  ForEachLine(log, [&](const json& e) {
    if (e.at("seq").get<uint64_t>() > from) state.Apply(e);
  });
  return state;
}

ServiceState AnnotationService::State() const {
  std::lock_guard lock(mu_);
  return state_;
}

}  // namespace legit
