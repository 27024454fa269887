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

#include "gtest/gtest.h"
#include "test_util.h"
#include "tsex/clue_encoders.h"
#include "tsex/errors.h"

namespace tsex {
namespace {

using testing::RandomMat;
using testing::RandomVec;
using testing::RelativeError;
using testing::ThrownCategory;

EmbeddingMatrix ThreeColumns(std::uint64_t seed) {
  Rng rng(seed);
  return EmbeddingMatrix(5, testing::ThreeClasses(), rng);
}

TEST(EmbeddingMatrixTest, EmbedsLabelSetsAsColumnSums) {
  const EmbeddingMatrix m = ThreeColumns(1);
  EXPECT_EQ(m.dim(), 5);
  EXPECT_EQ(m.size(), 3);
  EXPECT_EQ(m.Embed(LabelSet::Of({1})), Vec(m.columns().col(1)));
  const Vec both = m.Embed(LabelSet::Of({2, 0}));
  EXPECT_LT((both - m.columns().col(0) - m.columns().col(2)).norm(), 1e-15);
  EXPECT_EQ(m.Embed(LabelSet{}), Vec::Zero(5));
  EXPECT_EQ(ThrownCategory([&] { m.Embed(LabelSet::Of({3})); }),
            ErrorCategory::kVocabulary);
}

TEST(EmbeddingMatrixTest, BackwardAddsToSelectedColumns) {
  EmbeddingMatrix m = ThreeColumns(2);
  m.param().ZeroGrad();
  Vec g = Vec::LinSpaced(5, 1.0, 5.0);
  m.Backward(LabelSet::Of({0, 2}), g);
  m.Backward(LabelSet::Of({2}), g);
  EXPECT_EQ(Vec(m.param().grad.col(0)), g);
  EXPECT_EQ(Vec(m.param().grad.col(1)), Vec::Zero(5));
  EXPECT_EQ(Vec(m.param().grad.col(2)), 2.0 * g);
}

TEST(EmbeddingMatrixTest, ExtendAppendsAColumnAndName) {
  EmbeddingMatrix m = ThreeColumns(3);
  const Mat before = m.columns();
  const Vec e = Vec::Constant(5, 0.25);
  EXPECT_EQ(m.Extend(e, "bell_z"), 3);
  EXPECT_EQ(m.size(), 4);
  EXPECT_EQ(m.vocabulary().IndexOf("bell_z"), 3);
  EXPECT_EQ(Mat(m.columns().leftCols(3)), before);
  EXPECT_EQ(m.Embed(LabelSet::Of({3})), e);
  EXPECT_EQ(m.param().grad.cols(), 4);
  EXPECT_EQ(ThrownCategory([&] { m.Extend(e, "tone_a"); }),
            ErrorCategory::kVocabulary);
  EXPECT_EQ(ThrownCategory([&] { m.Extend(Vec::Ones(4), "bell_y"); }),
            ErrorCategory::kShape);
}

TEST(MeanPoolTest, AveragesFrames) {
  Mat f(2, 3);
  f << 1, 2, 3, -1, 0, 4;
  Vec expect(2);
  expect << 2.0, 1.0;
  EXPECT_LT((MeanPool(f) - expect).norm(), 1e-15);
}

class EnrollmentEncoderTest : public ::testing::Test {
 protected:
  EnrollmentEncoderTest() {
    const ModelConfig c = testing::TinyModelConfig();
    Rng rng(4);
    encoder_ = EnrollmentEncoder(c.codec, c.extractor, 1, rng);
  }
  EnrollmentEncoder encoder_;
};

TEST_F(EnrollmentEncoderTest, EmbeddingIsMeanOfSummaryFrames) {
  Rng rng(5);
  const Vec audio = RandomVec(37, rng);
  const Vec e = encoder_.Forward(audio, nullptr);
  EXPECT_EQ(e.size(), 8);
  EXPECT_LT((e - MeanPool(encoder_.SummaryFrames(audio))).norm(), 1e-13);
}

TEST_F(EnrollmentEncoderTest, MultipleEnrollmentsSum) {
  Rng rng(6);
  const std::vector<Waveform> audios{Waveform(RandomVec(30, rng)),
                                     Waveform(RandomVec(50, rng))};
  const Vec sum = encoder_.Forward(audios[0].samples(), nullptr) +
                  encoder_.Forward(audios[1].samples(), nullptr);
  EXPECT_LT((MultiEnrollEmbedding(audios, encoder_) - sum).norm(), 1e-13);
  Rng mrng(7);
  const EmbeddingMatrix m(8, testing::ThreeClasses(), mrng);
  EXPECT_LT((ClueEmbedding(EnrollmentSet{audios}, m, encoder_) - sum).norm(),
            1e-13);
  EXPECT_EQ(ClueEmbedding(LabelSet::Of({1}), m, encoder_),
            Vec(m.columns().col(1)));
}

TEST_F(EnrollmentEncoderTest, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  const Vec audio = RandomVec(45, rng);
  const Vec probe = RandomVec(8, rng);
  ParamList params;
  encoder_.CollectParams("enrollment", &params);
  ZeroGrads(params);
  EnrollmentEncoder::Cache cache;
  encoder_.Forward(audio, &cache);
  encoder_.Backward(cache, probe);
  for (const auto& p : params) {
    const auto entries = testing::SampleEntries(p.param->value.size(), 15, rng);
    const Vec num = testing::NumericParamGradient(
        [&] { return probe.dot(encoder_.Forward(audio, nullptr)); }, p.param,
        1e-6, entries);
    const Vec ana = testing::Gather(p.param->grad, entries);
    if (num.norm() < 1e-10 && ana.norm() < 1e-10) continue;
    EXPECT_LT(RelativeError(ana, num), 1e-5) << p.name;
  }
}

}  // namespace
}  // namespace tsex
