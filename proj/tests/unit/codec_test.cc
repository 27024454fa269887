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
#include "tsex/codec.h"
#include "tsex/errors.h"

namespace tsex {
namespace {

using testing::RandomMat;
using testing::RandomVec;
using testing::RelativeError;
using testing::ThrownCategory;

TEST(NumFramesTest, CountsWholeAndPaddedFrames) {
  EXPECT_EQ(NumFrames(100, 20, 10), 9);
  EXPECT_EQ(NumFrames(20, 20, 10), 1);
  EXPECT_EQ(NumFrames(101, 20, 10), 10);  // tail padded to one more frame
  EXPECT_EQ(PaddedLength(10, 20, 10), 110u);
  EXPECT_EQ(ThrownCategory([] { NumFrames(19, 20, 10); }),
            ErrorCategory::kLength);
}

TEST(EncoderTest, ZeroInputGivesZeroFeatures) {
  Rng rng(1);
  Encoder enc(CodecConfig{6, 20, 10}, rng);
  const Mat w = enc.Forward(Vec::Zero(100), nullptr);
  EXPECT_EQ(w.rows(), 6);
  EXPECT_EQ(w.cols(), 9);
  EXPECT_EQ(w.cwiseAbs().maxCoeff(), 0.0);
}

TEST(EncoderTest, RectifiedFeaturesAreNonNegative) {
  Rng rng(2);
  Encoder enc(CodecConfig{6, 8, 4}, rng);
  EXPECT_GE(enc.Forward(RandomVec(64, rng), nullptr).minCoeff(), 0.0);
}

TEST(EncoderTest, LinearWithoutRectifier) {
  Rng rng(3);
  Encoder enc(CodecConfig{6, 8, 4}, rng);
  enc.set_rectify(false);
  const Vec a = RandomVec(64, rng);
  const Vec b = RandomVec(64, rng);
  const Mat lhs = enc.Forward(2.0 * a - 0.5 * b, nullptr);
  const Mat rhs = 2.0 * enc.Forward(a, nullptr) - 0.5 * enc.Forward(b, nullptr);
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

TEST(EncoderTest, FramesMatchLoopOracle) {
  Rng rng(4);
  Encoder enc(CodecConfig{3, 4, 2}, rng);
  enc.set_rectify(false);
  const Vec x = RandomVec(9, rng);  // 4 frames, last one zero padded
  const Mat w = enc.Forward(x, nullptr);
  ASSERT_EQ(w.cols(), 4);
  const Mat& basis = enc.basis().value;
  for (int d = 0; d < 3; ++d) {
    for (int t = 0; t < 4; ++t) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        const int n = t * 2 + k;
        if (n < 9) acc += basis(d, k) * x[n];
      }
      EXPECT_NEAR(w(d, t), acc, 1e-12);
    }
  }
}

TEST(CodecTest, IdentityBasesReconstructExactly) {
  // Non-overlapping frames with identity analysis and synthesis bases.
  Rng rng(5);
  const CodecConfig config{8, 8, 8};
  Encoder enc(config, rng);
  Decoder dec(config, rng);
  enc.set_rectify(false);
  enc.basis().value = Mat::Identity(8, 8);
  dec.basis().value = Mat::Identity(8, 8);
  const Vec x = RandomVec(61, rng);
  const Vec y = dec.Forward(enc.Forward(x, nullptr), x.size());
  ASSERT_EQ(y.size(), x.size());
  EXPECT_LT((y - x).norm(), 1e-14);
}

TEST(DecoderTest, LinearInFeatures) {
  Rng rng(6);
  Decoder dec(CodecConfig{5, 8, 4}, rng);
  const Mat a = RandomMat(5, 7, rng);
  const Mat b = RandomMat(5, 7, rng);
  const Vec lhs = dec.Forward(a + 3.0 * b, 30);
  const Vec rhs = dec.Forward(a, 30) + 3.0 * dec.Forward(b, 30);
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

TEST(DecoderTest, OutputLengthFollowsRequest) {
  Rng rng(7);
  const CodecConfig config{5, 16, 8};
  Encoder enc(config, rng);
  Decoder dec(config, rng);
  for (std::size_t length : {16u, 17u, 100u, 4800u}) {
    const Mat w = enc.Forward(Vec::Ones(static_cast<Eigen::Index>(length)), nullptr);
    EXPECT_EQ(w.cols(), NumFrames(length, 16, 8));
    EXPECT_EQ(static_cast<std::size_t>(dec.Forward(w, length).size()), length);
  }
}

TEST(DecoderTest, RejectsLengthInconsistentWithFrames) {
  Rng rng(8);
  Decoder dec(CodecConfig{5, 8, 4}, rng);
  const Mat w = RandomMat(5, 3, rng);  // consistent with 13..16 samples
  EXPECT_EQ(ThrownCategory([&] { dec.Forward(w, 40); }), ErrorCategory::kLength);
  EXPECT_EQ(ThrownCategory([&] { dec.Forward(w, 12); }), ErrorCategory::kLength);
  EXPECT_EQ(dec.Forward(w, 13).size(), 13);
}

TEST(ApplyMaskTest, ElementwiseAndShapeChecked) {
  Mat w(2, 2), m(2, 2);
  w << 1, 2, 3, 4;
  m << 0, 0.5, 1, 0.25;
  Mat expect(2, 2);
  expect << 0, 1, 3, 1;
  EXPECT_EQ(ApplyMask(w, m), expect);
  EXPECT_EQ(ApplyMask(w, Mat::Ones(2, 2)), w);
  EXPECT_EQ(ApplyMask(w, Mat::Zero(2, 2)), Mat::Zero(2, 2));
  EXPECT_EQ(ThrownCategory([&] { ApplyMask(w, Mat::Ones(2, 3)); }),
            ErrorCategory::kShape);
}

TEST(CodecTest, MaskedRoundTripGradientsMatchFiniteDifferences) {
  Rng rng(9);
  const CodecConfig config{6, 8, 4};
  Encoder enc(config, rng);
  Decoder dec(config, rng);
  ParamList params;
  enc.CollectParams("encoder", &params);
  dec.CollectParams("decoder", &params);
  const Mat mask = RandomMat(6, 9, rng).cwiseAbs().cwiseMin(1.0);
  const Vec x = RandomVec(38, rng);
  const Vec probe = RandomVec(38, rng);

  auto loss = [&](const Vec& input) {
    return probe.dot(dec.Forward(ApplyMask(enc.Forward(input, nullptr), mask),
                                 static_cast<std::size_t>(input.size())));
  };
  ZeroGrads(params);
  Encoder::Cache cache;
  const Mat w = enc.Forward(x, &cache);
  const Mat masked = ApplyMask(w, mask);
  const Mat dmasked = dec.Backward(masked, probe);
  const Vec dx = enc.Backward(cache, dmasked.cwiseProduct(mask), x.size());

  EXPECT_LT(RelativeError(dx, testing::NumericGradient(loss, x, 1e-6)), 1e-6);
  for (const auto& p : params) {
    const auto entries = testing::SampleEntries(p.param->value.size(), 30, rng);
    const Vec num = testing::NumericParamGradient([&] { return loss(x); },
                                                  p.param, 1e-6, entries);
    EXPECT_LT(RelativeError(testing::Gather(p.param->grad, entries), num), 1e-6)
        << p.name;
  }
}

}  // namespace
}  // namespace tsex
