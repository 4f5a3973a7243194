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

#include "legit/annotation_http.h"

#include <string>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "legit/image_io.h"
#include "test_world.h"

namespace legit {
namespace {

using nlohmann::json;
using testing::Fixture;
using testing::TheWorld;

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig c;
    c.vocab = {"apple", "banana", "cherry", "damson", "elder", "figgy", "grape", "guava"};
    c.split_fractions = {1.0, 0.0, 0.0};
    c.batch_size = 3;
    c.gold_rate = 0.0;
    service_ = std::make_unique<AnnotationService>(
        c, ServiceResources{{{"imgdot", &TheWorld().ascii}}, &TheWorld().atlas});
    server_ = std::make_unique<AnnotationHttpServer>(*service_, "sesame");
    port_ = server_->Start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { server_->Stop(); }

  httplib::Headers Admin() const { return {{"X-Admin-Token", "sesame"}}; }
  std::string Session(const std::string& who) {
    auto res = client_->Post("/session", json{{"annotator", who}}.dump(), "application/json");
    EXPECT_EQ(res->status, 200);
    return json::parse(res->body).at("token").get<std::string>();
  }

  std::unique_ptr<AnnotationService> service_;
  std::unique_ptr<AnnotationHttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(HttpTest, FullFlow) {
  const std::string token = Session("alice");
  const httplib::Headers auth = {{"Authorization", "Bearer " + token}};
  auto res = client_->Get("/batch", auth);
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body).at("error"), "NoOpenRound");

  EXPECT_EQ(client_->Post("/admin/round/advance", "", "text/plain")->status, 401);
  res = client_->Post("/admin/round/advance", Admin(), "", "text/plain");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body).at("round"), 1);
  EXPECT_EQ(json::parse(res->body).at("pairs"), 8);

  res = client_->Get("/batch?token=" + token);
  ASSERT_EQ(res->status, 200);
  const json items = json::parse(res->body).at("items");
  ASSERT_EQ(items.size(), 3u);

  res = client_->Get(items[0].at("image1").get<std::string>());
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(res->body.substr(1, 3), "PNG");
  EXPECT_EQ(client_->Get("/img/nothing/1.png")->status, 404);

  const std::string item = items[0].at("id");
  res = client_->Post("/label", auth, json{{"item", item}, {"label", "L2"}}.dump(),
                      "application/json");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body).at("completed"), 1);
  EXPECT_EQ(json::parse(res->body).at("status"), "active");
  res = client_->Post("/label", auth, json{{"item", item}, {"label", "L2"}}.dump(),
                      "application/json");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body).at("error"), "AlreadyLabeled");

  EXPECT_EQ(client_->Post("/label", auth, json{{"item", item}, {"label", "??"}}.dump(),
                          "application/json")
                ->status,
            400);
  EXPECT_EQ(client_->Post("/label", auth, "{", "application/json")->status, 400);
  EXPECT_EQ(client_->Post("/label", json{{"item", item}, {"label", "BL"}}.dump(),
                          "application/json")
                ->status,
            401);

  res = client_->Get("/admin/export", Admin());
  ASSERT_EQ(res->status, 200);
  const json exported = json::parse(res->body);
  EXPECT_EQ(exported.at("stats").at("labels"), 1);
  const auto annotations = ParseAnnotationsJsonl(exported.at("annotations").get<std::string>());
  ASSERT_EQ(annotations.size(), 1u);
  EXPECT_EQ(annotations[0].label, Label::kL2);
  EXPECT_EQ(annotations[0].annotator, "alice");

  EXPECT_EQ(client_->Post("/admin/round/advance", Admin(), "", "text/plain")->status, 409);
  EXPECT_EQ(client_->Post("/admin/round/close", Admin(), "", "text/plain")->status, 200);
}

TEST(HttpStatusTest, Mapping) {
  EXPECT_EQ(HttpStatusFor(ErrorCode::kUnauthorized), 401);
  EXPECT_EQ(HttpStatusFor(ErrorCode::kDisqualified), 403);
  EXPECT_EQ(HttpStatusFor(ErrorCode::kNotFound), 404);
  EXPECT_EQ(HttpStatusFor(ErrorCode::kNotReserved), 409);
  EXPECT_EQ(HttpStatusFor(ErrorCode::kRoundOpen), 409);
  EXPECT_EQ(HttpStatusFor(ErrorCode::kFormatError), 400);
}

}  // namespace
}  // namespace legit
