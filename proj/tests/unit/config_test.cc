// Copyright 2026 The Tsex Authors. All Rights Reserved.
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

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tsex/config.h"
#include "tsex/errors.h"

namespace tsex {
namespace {

using testing::ThrownCategory;

class ConfigFileTest : public ::testing::Test {
 protected:
  std::filesystem::path Write(const std::string& text) {
    path_ = std::filesystem::temp_directory_path() / "tsex_config_test.ini";
    std::ofstream(path_) << text;
    return path_;
  }
  ~ConfigFileTest() override { std::filesystem::remove(path_); }
  std::filesystem::path path_;
};

TEST_F(ConfigFileTest, ReadsSectionsAndOverridesWin) {
  ConfigTree c = ConfigTree::Load(Write(
      "[train]\nmax_epochs = 12\nlearning_rate = 0.002\nclue_mode = mixed\n"
      "drop_inactive = yes\nseed = 18446744073709551615\n"
      "[loss]\nclass_weight = 0.25\n"));
  c.ApplyOverride("train.max_epochs=7");
  c.ApplyOverride(" loss.sdr_ceiling_db = 20 ");
  const TrainConfig t = ReadTrainConfig(c);
  EXPECT_EQ(t.max_epochs, 7);
  EXPECT_DOUBLE_EQ(t.learning_rate, 0.002);
  EXPECT_EQ(t.clue_mode, TrainClueMode::kMixed);
  EXPECT_TRUE(t.drop_inactive);
  EXPECT_EQ(t.seed, 18446744073709551615ull);
  EXPECT_DOUBLE_EQ(t.loss.class_weight, 0.25);
  EXPECT_DOUBLE_EQ(t.loss.sdr_ceiling_db, 20.0);
  EXPECT_EQ(t.batch_size, 8);  // untouched default
  const nlohmann::json echo = c.ToJson();
  EXPECT_EQ(echo["train"]["max_epochs"], "7");
  EXPECT_EQ(echo["loss"]["sdr_ceiling_db"], "20");
}

TEST_F(ConfigFileTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(ThrownCategory([&] { ConfigTree::Load(Write("[train]\nepochz = 3\n")); }),
            ErrorCategory::kConfig);
  ConfigTree c;
  EXPECT_EQ(ThrownCategory([&] { c.ApplyOverride("train.speed=3"); }), ErrorCategory::kConfig);
  EXPECT_EQ(ThrownCategory([&] { c.ApplyOverride("no_equals_sign"); }), ErrorCategory::kConfig);
  c.Set("train.max_epochs", "many");
  EXPECT_EQ(ThrownCategory([&] { ReadTrainConfig(c); }), ErrorCategory::kConfig);
  c.Set("train.max_epochs", "0");
  EXPECT_EQ(ThrownCategory([&] { ReadTrainConfig(c); }), ErrorCategory::kConfig);
  c.Set("train.max_epochs", "3");
  c.Set("train.drop_inactive", "maybe");
  EXPECT_EQ(ThrownCategory([&] { ReadTrainConfig(c); }), ErrorCategory::kConfig);
}

TEST_F(ConfigFileTest, MissingAndMalformedFiles) {
  EXPECT_EQ(ThrownCategory([] { ConfigTree::Load("/nonexistent/dir/x.ini"); }),
            ErrorCategory::kIo);
  EXPECT_EQ(ThrownCategory([&] { ConfigTree::Load(Write("[train\nmax_epochs=3\n")); }),
            ErrorCategory::kParse);
}

TEST(ConfigReadersTest, PresetsAndFieldOverrides) {
  ConfigTree c;
  EXPECT_EQ(ReadModelConfig(c).codec.frame_length, ModelConfig::Toy().codec.frame_length);
  c.Set("model.preset", "full");
  c.Set("model.blocks", "3");
  const ModelConfig m = ReadModelConfig(c);
  EXPECT_EQ(m.extractor.blocks, 3);
  EXPECT_EQ(m.codec.feature_dim, ModelConfig::Full().codec.feature_dim);
  c.Set("model.preset", "huge");
  EXPECT_EQ(ThrownCategory([&] { ReadModelConfig(c); }), ErrorCategory::kConfig);

  ConfigTree s;
  s.Set("simulate.num_train", "17");
  s.Set("simulate.classes", "tone_a, chirp_b ,noise_c,am_d");
  const SimulatorConfig sim = ReadSimulatorConfig(s);
  EXPECT_EQ(sim.num_train, 17);
  EXPECT_EQ(sim.classes, (std::vector<std::string>{"tone_a", "chirp_b", "noise_c", "am_d"}));
  s.Set("simulate.snr_min_db", "30");
  EXPECT_EQ(ThrownCategory([&] { ReadSimulatorConfig(s); }), ErrorCategory::kConfig);

  ConfigTree w;
  w.Set("weak.iterations", "40");
  w.Set("adapt.epochs", "9");
  w.Set("classifier.epochs", "4");
  EXPECT_EQ(ReadWeakRetrainConfig(w).iterations, 40);
  EXPECT_EQ(ReadAdaptConfig(w).epochs, 9);
  EXPECT_EQ(ReadClassifierTrainConfig(w).epochs, 4);
}

}  // namespace
}  // namespace tsex
