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

#include "legit/config.h"

#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>

#include "legit/error.h"
#include "legit/image_io.h"

namespace legit {
namespace {

TEST(ConfigTest, ParsesSectionsQuotesAndComments) {
  const Config c = Config::Parse(R"(# top
seed = 42
[font]
file = "/tmp/x y.hex"   # trailing comment
glyph_px = 64
[serve]
admin_token = 'abc#def'
)");
  EXPECT_EQ(c.GetUint("seed"), 42u);
  EXPECT_EQ(c.GetString("font.file"), "/tmp/x y.hex");
  EXPECT_EQ(c.GetInt("font.glyph_px"), 64);
  EXPECT_EQ(c.GetString("serve.admin_token"), "abc#def");
}

TEST(ConfigTest, ReportsLineOfBadInput) {
  try {
    Config::Parse("seed = 1\nthis line is wrong\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(Config::Parse("levels = [1, 2]\n"), Error);
}

TEST(ConfigTest, TypedGettersValidate) {
  Config c = Config::Defaults();
  c.Set("threads", "-3");
  EXPECT_THROW(c.GetUint("threads"), Error);
  c.Set("train.dropout", "0.x");
  EXPECT_THROW(c.GetDouble("train.dropout"), Error);
  c.Set("flag", "true");
  EXPECT_TRUE(c.GetBool("flag"));
  c.Set("flag", "false");
  EXPECT_FALSE(c.GetBool("flag"));
  c.Set("flag", "yes");
  EXPECT_THROW(c.GetBool("flag"), Error);
  EXPECT_THROW(c.GetString("no.such.key"), Error);
}

TEST(ConfigTest, MergeOverridesAndUnknownKeys) {
  Config c = Config::Defaults();
  c.Merge(Config::Parse("seed = 9\n[trian]\nepochs = 3\n"));
  EXPECT_EQ(c.GetUint("seed"), 9u);
  EXPECT_EQ(c.UnknownKeys(), std::vector<std::string>{"trian.epochs"});
  EXPECT_EQ(c.GetString("train.kind"), "mlp");
}

TEST(ConfigTest, ToStringParsesBack) {
  const Config c = Config::Defaults();
  const Config back = Config::Parse(c.ToString());
  EXPECT_EQ(back.values(), c.values());
}

TEST(ConfigTest, LoadFallsBackToEnvironment) {
  const auto path = std::filesystem::temp_directory_path() / "legit_config_test.toml";
  WriteFile(path.string(), "seed = 123\n");
  ::setenv("LEGIT_CONFIG", path.c_str(), 1);
  EXPECT_EQ(Config::Load().GetUint("seed"), 123u);
  ::unsetenv("LEGIT_CONFIG");
  EXPECT_TRUE(Config::Load().values().empty());
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace legit
