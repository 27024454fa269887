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

#include <cmath>
#include <filesystem>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tsex/classifier.h"
#include "tsex/errors.h"
#include "tsex/simulator.h"

namespace tsex {
namespace {

using testing::RandomVec;
using testing::RelativeError;
using testing::ThrownCategory;

ClassifierConfig SmallConfig() {
  ClassifierConfig c;
  c.window = 32;
  c.hop = 16;
  c.channels = 6;
  return c;
}

TEST(SpectralFrontEndTest, MatchesDirectWindowedDft) {
  const ClassifierConfig config = SmallConfig();
  SpectralFrontEnd front(config);
  Rng rng(1);
  const Vec x = RandomVec(70, rng);  // 4 frames, the last zero padded
  const Mat f = front.Forward(x, nullptr);
  ASSERT_EQ(f.rows(), 17);
  ASSERT_EQ(f.cols(), 4);
  for (int t = 0; t < 4; ++t) {
    for (int k = 0; k < 17; ++k) {
      double re = 0.0, im = 0.0;
      for (int n = 0; n < 32; ++n) {
        const int idx = t * 16 + n;
        const double s = idx < 70 ? x[idx] : 0.0;
        const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / 32.0);
        re += w * s * std::cos(2.0 * M_PI * k * n / 32.0);
        im -= w * s * std::sin(2.0 * M_PI * k * n / 32.0);
      }
      EXPECT_NEAR(f(k, t), 0.5 * std::log10(re * re + im * im + 1e-6), 1e-10);
    }
  }
  EXPECT_EQ(ThrownCategory([&] { front.Forward(Vec::Ones(31), nullptr); }),
            ErrorCategory::kLength);
}

TEST(ClassifierTest, PosteriorsInUnitRange) {
  Classifier c(SmallConfig(), testing::ThreeClasses(), 2);
  Rng rng(3);
  const Vec p = c.Classify(Waveform(RandomVec(200, rng)));
  ASSERT_EQ(p.size(), 3);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(p.maxCoeff(), 1.0);
}

TEST(ClassifierTest, GradientsMatchFiniteDifferences) {
  Classifier c(SmallConfig(), testing::ThreeClasses(), 4);
  Rng rng(5);
  const Vec x = RandomVec(90, rng, 0.5);
  const Vec probe = RandomVec(3, rng);
  ParamList params = c.Params();
  ZeroGrads(params);
  Classifier::Cache cache;
  c.Forward(x, &cache);
  const Vec dx = c.Backward(cache, probe);
  EXPECT_LT((dx - c.InputGradient(cache, probe)).norm(), 1e-12 * dx.norm());

  auto f = [&](const Vec& v) { return probe.dot(c.Forward(v, nullptr)); };
  const auto coords = testing::SampleEntries(90, 30, rng);
  EXPECT_LT(RelativeError(testing::Gather(dx, coords),
                          testing::NumericGradient(f, x, 1e-6, coords)),
            1e-5);
  for (const auto& p : params) {
    const auto entries = testing::SampleEntries(p.param->value.size(), 15, rng);
    const Vec num = testing::NumericParamGradient([&] { return f(x); }, p.param,
                                                  1e-6, entries);
    const Vec ana = testing::Gather(p.param->grad, entries);
    if (num.norm() < 1e-10 && ana.norm() < 1e-10) continue;
    EXPECT_LT(RelativeError(ana, num), 1e-5) << p.name;
  }
}

TEST(ClassifierTest, FrozenBackwardLeavesParametersAlone) {
  Classifier c(SmallConfig(), testing::ThreeClasses(), 6);
  c.set_frozen(true);
  Rng rng(7);
  ParamList params = c.Params();
  ZeroGrads(params);
  Classifier::Cache cache;
  c.Forward(RandomVec(64, rng), &cache);
  c.Backward(cache, RandomVec(3, rng));
  EXPECT_EQ(GradNormSquared(params), 0.0);
}

TEST(ClassifierTest, SaveLoadRoundTrip) {
  Classifier c(SmallConfig(), testing::ThreeClasses(), 8);
  const auto path = std::filesystem::temp_directory_path() / "tsex_cls.ckpt";
  c.Save(path);
  const Classifier back = Classifier::Load(path);
  std::filesystem::remove(path);
  Rng rng(9);
  const Waveform x(RandomVec(100, rng));
  EXPECT_EQ(back.Classify(x), c.Classify(x));
  EXPECT_EQ(back.vocabulary(), c.vocabulary());
}

// Band-disjoint toy classes are easy to tag; a few epochs must help.
TEST(TrainClassifierTest, LearnsToyClassesAndKeepsBestState) {
  const ToyClassBank bank = ToyClassBank::Default();
  const Vocabulary vocab({"tone_a", "noise_c", "tone_e"});
  Rng rng(10);
  auto make = [&](int n) {
    std::vector<LabeledAudio> out;
    for (int i = 0; i < n; ++i) {
      const int c = i % 3;
      const Vec x = 0.1 * bank.Synthesize(bank.Find(vocab.Name(c)), 800, rng);
      out.push_back({Waveform(x), LabelSet::Of({c})});
    }
    return out;
  };
  const auto train = make(30);
  const auto valid = make(9);
  ClassifierConfig cc;
  cc.window = 64;
  cc.hop = 32;
  cc.channels = 8;
  Classifier c(cc, vocab, 11);
  ClassifierTrainConfig tc;
  tc.epochs = 8;
  tc.batch_size = 6;
  tc.learning_rate = 3e-3;
  const ClassifierTrainReport report = TrainClassifier(&c, train, valid, tc);
  EXPECT_LT(report.best_valid_loss, report.initial_valid_loss);
  EXPECT_NEAR(ClassifierLoss(c, valid), report.best_valid_loss, 1e-12);
  EXPECT_EQ(report.valid_losses.size(), 8u);
}

TEST(SelectOutputTest, HighestPosteriorLowestIndexOnTies) {
  Classifier c(SmallConfig(), testing::ThreeClasses(), 12);
  Rng rng(13);
  const Waveform a(RandomVec(64, rng));
  const Waveform b(RandomVec(64, rng));
  const int expect = c.Classify(b)[1] > c.Classify(a)[1] ? 1 : 0;
  EXPECT_EQ(SelectOutput({a, b}, 1, c), expect);
  EXPECT_EQ(SelectOutput({b, b, a}, 1, c), expect == 1 ? 0 : 2);
  EXPECT_EQ(SelectOutput({a, a}, 2, c), 0);
}

}  // namespace
}  // namespace tsex
