// Copyright 2026 The QACE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include "qace/run_config.hpp"

namespace qace {
namespace {

TEST(RunConfig, ParsesFlatFile) {
  const auto config = RunConfig::ParseText(
      "# comment\nmode = img\n\nseed=42  # trailing\nsimilarity.components = f1, embedding\n",
      "test");
  EXPECT_EQ(config.Get("mode"), "img");
  EXPECT_EQ(config.GetUnsigned("seed", 0), 42u);
  EXPECT_EQ(config.Get("similarity.components"), "f1, embedding");
  EXPECT_EQ(config.Get("backend", "none"), "none");
  EXPECT_EQ(config.ToJson().at("mode"), "img");
}

TEST(RunConfig, LaterSetOverrides) {
  auto config = RunConfig::ParseText("mode = img\n", "test");
  config.Set("mode", "ref");
  EXPECT_EQ(config.Get("mode"), "ref");
}

TEST(RunConfig, Errors) {
  const auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kRecordError;
  };
  EXPECT_EQ(kind([] { RunConfig::ParseText("colour = blue\n", "t"); }), ErrorKind::kConfigError);
  EXPECT_EQ(kind([] { RunConfig::ParseText("mode img\n", "t"); }), ErrorKind::kConfigError);
  const auto config = RunConfig::ParseText("seed = -1\nratio = x\npearson = maybe\n", "t");
  EXPECT_EQ(kind([&] { config.GetUnsigned("seed", 0); }), ErrorKind::kConfigError);
  EXPECT_EQ(kind([&] { config.GetDouble("ratio", 0); }), ErrorKind::kConfigError);
  EXPECT_EQ(kind([&] { config.GetBool("pearson", false); }), ErrorKind::kConfigError);
  EXPECT_EQ(kind([&] { config.Require("backend"); }), ErrorKind::kConfigError);
  EXPECT_EQ(kind([] { RunConfig::Load("/nonexistent.cfg"); }), ErrorKind::kConfigError);
}

}  // namespace
}  // namespace qace
