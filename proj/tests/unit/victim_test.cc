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

#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "legit/attack.h"
#include "legit/error.h"
#include "test_world.h"

namespace legit {
namespace {

using testing::Fixture;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(ProtocolTest, FormatRequests) {
  EXPECT_EQ(FormatVictimRequests({"a \"b\"", "c"}),
            "{\"id\":0,\"text\":\"a \\\"b\\\"\"}\n{\"id\":1,\"text\":\"c\"}\n");
}

TEST(ProtocolTest, ParseAcceptsAnyOrder) {
  const auto s = ParseVictimResponses(
      "{\"id\":1,\"scores\":{\"toxic\":0.25}}\n\n{\"id\":0,\"scores\":{\"toxic\":1,\"x\":0}}", 2);
  EXPECT_EQ(s[0].at("toxic"), 1.0);
  EXPECT_EQ(s[0].at("x"), 0.0);
  EXPECT_EQ(s[1].at("toxic"), 0.25);
}

TEST(ProtocolTest, ParseRejectsMalformed) {
  const auto bad = [](std::string text, size_t n) {
    return CodeOf([&] { ParseVictimResponses(text, n); });
  };
  EXPECT_EQ(bad("{\"id\":0,\"scores\":{}}", 2), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(bad("{\"id\":0,\"scores\":{}}\n{\"id\":0,\"scores\":{}}", 1),
            ErrorCode::kSchemaMismatch);
  EXPECT_EQ(bad("{\"id\":3,\"scores\":{}}", 1), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(bad("{\"id\":\"0\",\"scores\":{}}", 1), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(bad("{\"id\":0,\"scores\":{\"t\":\"high\"}}", 1), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(bad("{\"id\":0}", 1), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(bad("not json", 1), ErrorCode::kSchemaMismatch);
}

TEST(MakeVictimTest, Specs) {
  EXPECT_EQ(MakeVictim("cmd:cat")->name(), "cmd:cat");
  EXPECT_EQ(MakeVictim("http://localhost:9/")->name(), "http:http://localhost:9");
  EXPECT_EQ(MakeVictim("http:localhost:9")->name(), "http:localhost:9");
  EXPECT_THROW(MakeVictim("toy"), Error);
}

TEST(SubprocessVictimTest, ShellCommandRoundTrip) {
  // Echoes each id with a constant score, in reverse order.
  SubprocessVictim v(
      "sed -E 's/^\\{\"id\":([0-9]+).*/{\"id\":\\1,\"scores\":{\"toxic\":0.75}}/' | tac");
  const auto s = v.Predict({"one", "two", "three"});
  ASSERT_EQ(s.size(), 3u);
  for (const auto& m : s) EXPECT_EQ(m.at("toxic"), 0.75);
  EXPECT_TRUE(v.Predict({}).empty());
}

TEST(SubprocessVictimTest, FailuresAreTyped) {
  EXPECT_EQ(CodeOf([] { SubprocessVictim("exit 3").Predict({"x"}); }),
            ErrorCode::kVictimUnavailable);
  EXPECT_EQ(CodeOf([] { SubprocessVictim("head -c 0").Predict({"x"}); }),
            ErrorCode::kSchemaMismatch);
}

TEST(SubprocessVictimTest, ToyVictimBinaryMatchesLibrary) {
  const auto corpus = LoadCorpus(Fixture("corpus.jsonl"));
  std::vector<std::string> texts;
  std::vector<bool> labels;
  for (const auto& e : corpus) {
    texts.push_back(e.text);
    labels.push_back(e.labels.at("toxic"));
  }
  ToyNgramVictim lib = ToyNgramVictim::Train(texts, labels);
  SubprocessVictim cmd(std::string(LEGIT_TOY_VICTIM) + " --train " + Fixture("corpus.jsonl"));
  const std::vector<std::string> probe(texts.begin(), texts.begin() + 10);
  const auto a = lib.Predict(probe);
  const auto b = cmd.Predict(probe);
  for (size_t i = 0; i < probe.size(); ++i) {
    EXPECT_NEAR(a[i].at("toxic"), b[i].at("toxic"), 1e-12) << probe[i];
  }
}

TEST(ToyVictimTest, LearnsCorpusAndRoundTrips) {
  const auto corpus = LoadCorpus(Fixture("corpus.jsonl"));
  std::vector<std::string> texts;
  std::vector<bool> labels;
  for (const auto& e : corpus) {
    texts.push_back(e.text);
    labels.push_back(e.labels.at("toxic"));
  }
  ToyNgramVictim v = ToyNgramVictim::Train(texts, labels);
  size_t right = 0;
  for (size_t i = 0; i < texts.size(); ++i) right += (v.Probability(texts[i]) >= 0.5) == labels[i];
  EXPECT_GE(right, 195u);
  const ToyNgramVictim w = ToyNgramVictim::FromJson(v.ToJson());
  EXPECT_DOUBLE_EQ(w.Probability("you idiot"), v.Probability("you idiot"));
  EXPECT_THROW(ToyNgramVictim::Train({}, {}), Error);
  EXPECT_THROW(ToyNgramVictim::FromJson(nlohmann::json{{"format", "x"}}), Error);
}

class HttpVictimTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      const auto j = nlohmann::json::parse(req.body);
      if (mode_ == "error") {
        res.status = 503;
        return;
      }
      const int id = mode_ == "wrong-id" ? 99 : j.at("id").get<int>();
      const double score = static_cast<double>(j.at("text").get<std::string>().size()) / 10.0;
      res.set_content(nlohmann::json{{"id", id}, {"scores", {{"toxic", score}}}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string Url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string mode_ = "ok";
};

TEST_F(HttpVictimTest, ParallelRequestsKeepOrder) {
  HttpVictim v(Url() + "/", 3);
  std::vector<std::string> texts;
  for (int i = 0; i < 20; ++i) texts.push_back(std::string(i % 7, 'x'));
  const auto s = v.Predict(texts);
  ASSERT_EQ(s.size(), texts.size());
  for (size_t i = 0; i < texts.size(); ++i) {
    EXPECT_DOUBLE_EQ(s[i].at("toxic"), texts[i].size() / 10.0);
  }
}

TEST_F(HttpVictimTest, ErrorsAreTyped) {
  mode_ = "error";
  EXPECT_EQ(CodeOf([&] { HttpVictim(Url()).Predict({"a"}); }), ErrorCode::kVictimUnavailable);
  mode_ = "wrong-id";
  EXPECT_EQ(CodeOf([&] { HttpVictim(Url()).Predict({"a", "b"}); }),
            ErrorCode::kSchemaMismatch);
  EXPECT_EQ(CodeOf([] { HttpVictim("http://127.0.0.1:1", 1, 1.0).Predict({"a"}); }),
            ErrorCode::kVictimUnavailable);
}

}  // namespace
}  // namespace legit
