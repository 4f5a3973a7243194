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

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"
#include "legit/image_io.h"
#include "test_world.h"

namespace legit {
namespace {

using nlohmann::json;
using testing::Fixture;
using testing::TheWorld;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::kInvalidArgument;
}

std::vector<std::string> Vocab(size_t n) {
  std::vector<std::string> words;
  const std::string text = ReadFile(Fixture("vocab.txt"));
  size_t start = 0;
  while (words.size() < n && start < text.size()) {
    const size_t end = text.find('\n', start);
    words.push_back(text.substr(start, end - start));
    start = end == std::string::npos ? text.size() : end + 1;
  }
  return words;
}

class ServiceTest : public ::testing::Test {
 protected:
  ServiceConfig Config(size_t words) {
    ServiceConfig c;
    c.vocab = Vocab(words);
    c.gold = ParseGoldJsonl(ReadFile(Fixture("gold.jsonl")));
    c.gold_rate = 0.0;
    c.batch_size = 5;
    c.seed = 3;
    return c;
  }
  ServiceResources Resources() { return {{{"imgdot", &TheWorld().ascii}}, &TheWorld().atlas}; }
  Clock FakeClock() {
    return [this] { return now_; };
  }

  int64_t now_ = 1'000'000;
};

TEST_F(ServiceTest, InitFiltersVocabAndSplits) {
  ServiceConfig c = Config(30);
  c.vocab.push_back("Hi");
  c.vocab.push_back(c.vocab[0]);
  AnnotationService s(c, Resources(), "", FakeClock());
  const ServiceState st = s.State();
  EXPECT_EQ(st.config().vocab.size(), 30u);
  EXPECT_EQ(st.splits().train.size() + st.splits().val.size() + st.splits().test.size(), 30u);
  EXPECT_EQ(st.last_seq(), 1u);
  EXPECT_EQ(ParseGoldJsonl(ReadFile(Fixture("gold.jsonl"))).size(), 40u);
}

TEST_F(ServiceTest, SessionsAreIdempotent) {
  AnnotationService s(Config(10), Resources(), "", FakeClock());
  const std::string a = s.CreateSession("ann-a");
  EXPECT_EQ(a.size(), 32u);
  EXPECT_EQ(s.CreateSession("ann-a"), a);
  EXPECT_NE(s.CreateSession("ann-b"), a);
  EXPECT_EQ(CodeOf([&] { s.CreateSession(""); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { s.GetBatch("nope"); }), ErrorCode::kUnauthorized);
  EXPECT_EQ(CodeOf([&] { s.GetBatch(a); }), ErrorCode::kNoOpenRound);
}

TEST_F(ServiceTest, RoundsFollowAdaptiveSchedule) {
  ServiceConfig c = Config(20);
  AnnotationService s(c, Resources(), "", FakeClock());
  const RoundInfo r1 = s.AdvanceRound();
  EXPECT_EQ(r1.index, 1u);
  EXPECT_EQ(r1.prior1, c.prior1);
  EXPECT_EQ(r1.pairs, 20u);
  EXPECT_EQ(CodeOf([&] { s.AdvanceRound(); }), ErrorCode::kRoundOpen);
  for (const ServicePair& p : s.State().pairs()) {
    EXPECT_EQ(p.required, p.split == Split::kTest ? 3u : 1u);
    EXPECT_NE(p.w1, p.w2);
  }
  EXPECT_TRUE(s.CloseRound().closed);
  EXPECT_EQ(CodeOf([&] { s.CloseRound(); }), ErrorCode::kNoOpenRound);
  const RoundInfo r2 = s.AdvanceRound();
  const auto [want1, want2] = AdaptiveUpdate(c.prior1, c.prior2, c.adaptive);
  EXPECT_EQ(r2.prior1, want1);
  EXPECT_EQ(r2.prior2, want2);
  EXPECT_EQ(r2.pairs, 20u);  // every word already used, so all are reused
}

TEST_F(ServiceTest, WordsPerRoundPrefersUnusedWords) {
  ServiceConfig c = Config(20);
  c.words_per_round = 8;
  AnnotationService s(c, Resources(), "", FakeClock());
  s.AdvanceRound();
  s.CloseRound();
  s.AdvanceRound();
  s.CloseRound();
  std::set<std::string> words;
  for (const auto& p : s.State().pairs()) words.insert(p.word);
  EXPECT_EQ(words.size(), 16u);
}

TEST_F(ServiceTest, ReservationsExpire) {
  ServiceConfig c = Config(12);
  c.split_fractions = {1.0, 0.0, 0.0};
  c.batch_size = 8;
  c.reservation_ttl_ms = 1000;
  AnnotationService s(c, Resources(), "", FakeClock());
  s.AdvanceRound();
  const std::string a = s.CreateSession("a"), b = s.CreateSession("b");
  const auto batch_a = s.GetBatch(a);
  ASSERT_EQ(batch_a.size(), 8u);
  EXPECT_EQ(batch_a[0].image1, "/img/" + batch_a[0].id + "/1.png");
  EXPECT_EQ(s.GetBatch(b).size(), 4u);
  now_ += 1000;
  const auto again = s.GetBatch(b);
  EXPECT_EQ(again.size(), 8u);
  EXPECT_EQ(CodeOf([&] { s.SubmitLabel(a, batch_a[0].id, Label::kBL); }),
            ErrorCode::kNotReserved);
  EXPECT_EQ(s.SubmitLabel(b, again[0].id, Label::kL1).completed, 1u);
  EXPECT_EQ(CodeOf([&] { s.SubmitLabel(b, again[0].id, Label::kL1); }),
            ErrorCode::kAlreadyLabeled);
}

TEST_F(ServiceTest, TestPairsNeedThreeAnnotators) {
  ServiceConfig c = Config(6);
  c.split_fractions = {0.0, 0.0, 1.0};
  c.batch_size = 10;
  AnnotationService s(c, Resources(), "", FakeClock());
  s.AdvanceRound();
  const Label plan[3][6] = {{Label::kL1, Label::kL1, Label::kL1, Label::kBL, Label::kNL, Label::kL2},
                            {Label::kL1, Label::kL2, Label::kL2, Label::kBL, Label::kNL, Label::kL2},
                            {Label::kL1, Label::kL2, Label::kNL, Label::kBL, Label::kNL, Label::kL2}};
  const auto pairs = s.State().pairs();
  for (int who = 0; who < 3; ++who) {
    const std::string token = s.CreateSession("ann" + std::to_string(who));
    const auto batch = s.GetBatch(token);
    ASSERT_EQ(batch.size(), 6u);
    for (const auto& item : batch) {
      size_t idx = 0;
      while (pairs[idx].id != item.id) ++idx;
      s.SubmitLabel(token, item.id, plan[who][idx]);
    }
  }
  EXPECT_TRUE(s.GetBatch(s.CreateSession("late")).empty());
  const json stats = s.ExportStats();
  EXPECT_EQ(stats.at("complete_pairs"), 6);
  EXPECT_EQ(stats.at("dropped_test_pairs"), 1);
  EXPECT_EQ(stats.at("exported_annotations"), 15);
  EXPECT_DOUBLE_EQ(stats.at("test_agreement").at("all").get<double>(), 4.0 / 6.0);
  const auto exported = ParseAnnotationsJsonl(s.ExportJsonl());
  EXPECT_EQ(exported.size(), 15u);
  const LegitDataset ds = BuildDataset(exported);
  EXPECT_EQ(ds.pairs.size(), 5u);
}

TEST_F(ServiceTest, FailingGoldDisqualifiesAndVoids) {
  ServiceConfig c = Config(200);
  c.split_fractions = {1.0, 0.0, 0.0};
  c.batch_size = 10;
  c.gold_rate = 0.5;
  AnnotationService s(c, Resources(), "", FakeClock());
  s.AdvanceRound();
  const std::string token = s.CreateSession("bad");
  size_t pair_labels = 0;
  bool disqualified = false;
  while (!disqualified) {
    const auto batch = s.GetBatch(token);
    ASSERT_FALSE(batch.empty());
    const json st = s.State().ToJson();
    for (const auto& item : batch) {
      Label answer = Label::kBL;
      for (const auto& g : st.at("gold_instances")) {
        if (g.at(0) == item.id) {
          const Label truth = c.gold[g.at(1).get<size_t>()].label;
          answer = truth == Label::kNL ? Label::kL1 : Label::kNL;
        }
      }
      const LabelAck ack = s.SubmitLabel(token, item.id, answer);
      if (answer == Label::kBL) ++pair_labels;
      if (ack.disqualified) {
        disqualified = true;
        break;
      }
    }
  }
  const AnnotatorState* a = s.State().Annotator("bad");
  EXPECT_EQ(a->gold_attempted, 10u);
  EXPECT_EQ(a->gold_correct, 0u);
  EXPECT_GT(pair_labels, 0u);
  EXPECT_EQ(s.ExportStats().at("labels"), 0);
  EXPECT_EQ(CodeOf([&] { s.GetBatch(token); }), ErrorCode::kDisqualified);
  EXPECT_EQ(CodeOf([&] { s.CreateSession("bad"); }), ErrorCode::kDisqualified);
}

TEST_F(ServiceTest, LogReplayAndRestart) {
  const std::string dir =
      (std::filesystem::temp_directory_path() / "legit_service_test").string();
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string log = dir + "/events.jsonl";
  ServiceConfig c = Config(15);
  c.gold_rate = 0.3;
  std::string token;
  {
    AnnotationService s(c, Resources(), log, FakeClock());
    s.AdvanceRound();
    token = s.CreateSession("a");
    const auto batch = s.GetBatch(token);
    s.SubmitLabel(token, batch[0].id, Label::kL2);
    s.SaveSnapshot(dir + "/snap.json");
    s.SubmitLabel(token, batch[1].id, Label::kNL);
    EXPECT_EQ(ReadFile(log), s.LogText());
    EXPECT_EQ(ReplayLog(s.LogText()).ToJson(), s.State().ToJson());
    EXPECT_EQ(AnnotationService::LoadSnapshot(dir + "/snap.json", s.LogText()).ToJson(),
              s.State().ToJson());
  }
  // Config arguments are ignored when the log already exists.
  AnnotationService restarted(Config(3), Resources(), log, FakeClock());
  EXPECT_EQ(restarted.State().config().vocab.size(), 15u);
  EXPECT_EQ(restarted.CreateSession("a"), token);
  EXPECT_EQ(restarted.State().Annotator("a")->completed, 2u);
  std::filesystem::remove_all(dir);
}

TEST_F(ServiceTest, ReplayRejectsBadLogs) {
  AnnotationService s(Config(5), Resources(), "", FakeClock());
  s.CreateSession("a");
  std::string text = s.LogText();
  EXPECT_EQ(CodeOf([&] { ReplayLog(text + text); }), ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf([&] { ReplayLog(text.substr(text.find('\n') + 1)); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf([&] { ReplayLog(text + "{\"seq\":3,\"type\":\"warp\"}\n"); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf([&] { ReplayLog(text + "{oops\n"); }), ErrorCode::kFormatError);
  EXPECT_EQ(
      CodeOf([&] {
        ReplayLog(text + "{\"seq\":3,\"type\":\"label\",\"annotator\":\"zz\",\"item\":\"x\","
                         "\"label\":\"BL\"}\n");
      }),
      ErrorCode::kFormatError);
}

TEST_F(ServiceTest, ImagesArePngs) {
  AnnotationService s(Config(5), Resources(), "", FakeClock());
  s.AdvanceRound();
  const std::string id = s.State().pairs()[0].id;
  const std::string png = s.ItemImagePng(id, 2);
  EXPECT_EQ(png.substr(1, 3), "PNG");
  EXPECT_EQ(CodeOf([&] { s.ItemImagePng(id, 3); }), ErrorCode::kNotFound);
  EXPECT_EQ(CodeOf([&] { s.ItemImagePng("ffff", 1); }), ErrorCode::kNotFound);
}

TEST_F(ServiceTest, ConfigValidation) {
  ServiceConfig c = Config(5);
  c.batch_size = 0;
  EXPECT_THROW(AnnotationService(c, Resources(), "", FakeClock()), Error);
  c = Config(5);
  c.gold_rate = 1.5;
  EXPECT_THROW(c.Validate(), Error);
  c = Config(5);
  EXPECT_EQ(ServiceConfigFromJson(ToJson(c)).gold, c.gold);
  AnnotationService no_tables(Config(5), {}, "", FakeClock());
  EXPECT_EQ(CodeOf([&] { no_tables.AdvanceRound(); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace legit
