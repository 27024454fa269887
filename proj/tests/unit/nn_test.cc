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
#include <functional>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tsex/adam.h"
#include "tsex/errors.h"
#include "tsex/nn.h"

namespace tsex {
namespace {

using testing::NumericGradient;
using testing::NumericParamGradient;
using testing::RandomMat;
using testing::RelativeError;
using testing::SampleEntries;

constexpr double kStep = 1e-5;
constexpr double kTol = 1e-6;

Vec Flat(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat Unflat(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

// Checks input and parameter gradients of y = forward(x) under the scalar
// probe <R, y>.
void CheckLayer(const std::function<Mat(const Mat&)>& forward,
                const std::function<Mat(const Mat&, const Mat&)>& backward,
                const ParamList& params, const Mat& x, Rng& rng) {
  const Mat y = forward(x);
  const Mat probe = RandomMat(y.rows(), y.cols(), rng);
  ZeroGrads(params);
  const Mat dx = backward(x, probe);

  auto loss_of_x = [&](const Vec& flat) {
    return forward(Unflat(flat, x.rows(), x.cols())).cwiseProduct(probe).sum();
  };
  const Vec numeric = NumericGradient(loss_of_x, Flat(x), kStep);
  EXPECT_LT(RelativeError(Flat(dx), numeric), kTol) << "input gradient";

  for (const auto& p : params) {
    const auto entries = SampleEntries(p.param->value.size(), 40, rng);
    const Vec analytic = testing::Gather(p.param->grad, entries);
    const Vec num = NumericParamGradient(
        [&] { return forward(x).cwiseProduct(probe).sum(); }, p.param, kStep,
        entries);
    EXPECT_LT(RelativeError(analytic, num), kTol) << p.name;
  }
}

TEST(Conv1x1Test, MatchesLoopOracle) {
  Rng rng(1);
  Conv1x1 layer(3, 4, true, rng);
  ParamList params;
  layer.CollectParams("c", &params);
  params[1].param->value = RandomMat(4, 1, rng);
  const Mat x = RandomMat(3, 5, rng);
  const Mat y = layer.Forward(x);
  const Mat& w = params[0].param->value;
  for (int o = 0; o < 4; ++o) {
    for (int t = 0; t < 5; ++t) {
      double acc = params[1].param->value(o, 0);
      for (int i = 0; i < 3; ++i) acc += w(o, i) * x(i, t);
      EXPECT_NEAR(y(o, t), acc, 1e-12);
    }
  }
}

TEST(Conv1x1Test, GradientsMatchFiniteDifferences) {
  Rng rng(2);
  Conv1x1 layer(3, 4, true, rng);
  ParamList params;
  layer.CollectParams("c", &params);
  CheckLayer([&](const Mat& x) { return layer.Forward(x); },
             [&](const Mat& x, const Mat& dy) { return layer.Backward(x, dy); },
             params, RandomMat(3, 6, rng), rng);
}

TEST(Conv1x1Test, FrozenLayerLeavesGradientsAlone) {
  Rng rng(3);
  Conv1x1 layer(3, 2, true, rng);
  ParamList params;
  layer.CollectParams("c", &params);
  layer.set_frozen(true);
  ZeroGrads(params);
  const Mat x = RandomMat(3, 4, rng);
  const Mat dx = layer.Backward(x, RandomMat(2, 4, rng));
  EXPECT_EQ(GradNormSquared(params), 0.0);
  EXPECT_GT(dx.norm(), 0.0);
}

TEST(DepthwiseConvTest, MatchesLoopOracleWithDilation) {
  Rng rng(4);
  DepthwiseConv layer(2, 3, 2, rng);
  ParamList params;
  layer.CollectParams("d", &params);
  params[1].param->value = RandomMat(2, 1, rng);
  const Mat x = RandomMat(2, 7, rng);
  const Mat y = layer.Forward(x);
  const Mat& w = params[0].param->value;
  for (int c = 0; c < 2; ++c) {
    for (int t = 0; t < 7; ++t) {
      double acc = params[1].param->value(c, 0);
      for (int k = 0; k < 3; ++k) {
        const int src = t + (k - 1) * 2;
        if (src >= 0 && src < 7) acc += w(c, k) * x(c, src);
      }
      EXPECT_NEAR(y(c, t), acc, 1e-12);
    }
  }
}

TEST(DepthwiseConvTest, GradientsMatchFiniteDifferences) {
  Rng rng(5);
  DepthwiseConv layer(3, 3, 4, rng);
  ParamList params;
  layer.CollectParams("d", &params);
  CheckLayer([&](const Mat& x) { return layer.Forward(x); },
             [&](const Mat& x, const Mat& dy) { return layer.Backward(x, dy); },
             params, RandomMat(3, 9, rng), rng);
}

TEST(Conv1dTest, MatchesLoopOracle) {
  Rng rng(6);
  Conv1d layer(2, 3, 3, rng);
  ParamList params;
  layer.CollectParams("k", &params);
  params[1].param->value = RandomMat(3, 1, rng);
  const Mat x = RandomMat(2, 5, rng);
  const Mat y = layer.Forward(x);
  const Mat& w = params[0].param->value;  // out x (kernel * in), tap-major
  for (int o = 0; o < 3; ++o) {
    for (int t = 0; t < 5; ++t) {
      double acc = params[1].param->value(o, 0);
      for (int k = 0; k < 3; ++k) {
        const int src = t + k - 1;
        if (src < 0 || src >= 5) continue;
        for (int i = 0; i < 2; ++i) acc += w(o, k * 2 + i) * x(i, src);
      }
      EXPECT_NEAR(y(o, t), acc, 1e-12);
    }
  }
}

TEST(Conv1dTest, GradientsMatchFiniteDifferences) {
  Rng rng(7);
  Conv1d layer(3, 2, 3, rng);
  ParamList params;
  layer.CollectParams("k", &params);
  CheckLayer([&](const Mat& x) { return layer.Forward(x); },
             [&](const Mat& x, const Mat& dy) { return layer.Backward(x, dy); },
             params, RandomMat(3, 6, rng), rng);
}

TEST(Conv1dTest, InputGradientEqualsBackwardWithoutParamUpdates) {
  Rng rng(8);
  Conv1d layer(3, 2, 3, rng);
  ParamList params;
  layer.CollectParams("k", &params);
  const Mat x = RandomMat(3, 6, rng);
  const Mat dy = RandomMat(2, 6, rng);
  ZeroGrads(params);
  const Mat a = layer.InputGradient(dy);
  EXPECT_EQ(GradNormSquared(params), 0.0);
  EXPECT_LT((a - layer.Backward(x, dy)).norm(), 1e-14);
}

TEST(PReluTest, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  PRelu layer;
  ParamList params;
  layer.CollectParams("a", &params);
  CheckLayer([&](const Mat& x) { return layer.Forward(x); },
             [&](const Mat& x, const Mat& dy) { return layer.Backward(x, dy); },
             params, RandomMat(3, 5, rng), rng);
}

TEST(GlobalLayerNormTest, MatchesDirectStatistics) {
  Rng rng(10);
  GlobalLayerNorm layer(3);
  const Mat x = RandomMat(3, 4, rng, 2.0).array() + 5.0;
  const Mat y = layer.Forward(x, nullptr);
  // Unit gain, zero shift at init: overall zero mean, unit variance.
  EXPECT_NEAR(y.mean(), 0.0, 1e-12);
  EXPECT_NEAR((y.array() - y.mean()).square().mean(), 1.0, 1e-6);
}

TEST(GlobalLayerNormTest, GradientsMatchFiniteDifferences) {
  Rng rng(11);
  GlobalLayerNorm layer(3);
  ParamList params;
  layer.CollectParams("n", &params);
  params[0].param->value = RandomMat(3, 1, rng);
  params[1].param->value = RandomMat(3, 1, rng);
  CheckLayer(
      [&](const Mat& x) { return layer.Forward(x, nullptr); },
      [&](const Mat& x, const Mat& dy) {
        GlobalLayerNorm::Cache cache;
        layer.Forward(x, &cache);
        return layer.Backward(cache, dy);
      },
      params, RandomMat(3, 5, rng), rng);
}

TEST(SigmoidTest, StableAtExtremesAndInUnitRange) {
  Mat x(1, 4);
  x << -800.0, -30.0, 30.0, 800.0;
  const Mat y = Sigmoid(x);
  EXPECT_TRUE(y.allFinite());
  EXPECT_GE(y.minCoeff(), 0.0);
  EXPECT_LE(y.maxCoeff(), 1.0);
  EXPECT_NEAR(Sigmoid(Mat::Zero(1, 1))(0, 0), 0.5, 1e-15);
}

TEST(TcnBlockTest, GradientsMatchFiniteDifferences) {
  Rng rng(12);
  TcnBlock block(4, 6, 3, 2, rng);
  ParamList params;
  block.CollectParams("b", &params);
  CheckLayer(
      [&](const Mat& x) { return block.Forward(x, nullptr); },
      [&](const Mat& x, const Mat& dy) {
        TcnBlock::Cache cache;
        block.Forward(x, &cache);
        return block.Backward(cache, dy);
      },
      params, RandomMat(4, 7, rng), rng);
}

TEST(TcnStackTest, DilationDoublesAndGradientsMatch) {
  Rng rng(13);
  TcnConfig config{4, 6, 3, 3, 2};
  TcnStack stack(config, rng);
  EXPECT_EQ(stack.num_blocks(), 6);
  ParamList params;
  stack.CollectParams("s", &params);
  CheckLayer(
      [&](const Mat& x) { return stack.Forward(x, nullptr); },
      [&](const Mat& x, const Mat& dy) {
        TcnStack::Cache cache;
        stack.Forward(x, &cache);
        return stack.Backward(cache, dy);
      },
      params, RandomMat(4, 9, rng), rng);
}

TEST(TcnStackTest, PreservesFrameCount) {
  Rng rng(14);
  TcnStack stack(TcnConfig{4, 6, 3, 4, 1}, rng);
  for (int frames : {1, 2, 9, 33}) {
    EXPECT_EQ(stack.Forward(RandomMat(4, frames, rng), nullptr).cols(), frames);
  }
}

TEST(AdamTest, FirstStepMovesEachEntryByLearningRate) {
  Param p(Mat::Zero(2, 3));
  p.grad << 1.0, -2.0, 0.5, 3.0, -0.1, 4.0;
  Adam adam(SlotsFor({{"p", &p}}), AdamConfig{0.01});
  adam.Step();
  // With bias correction the first update is lr * g / (|g| + eps').
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    const double g = p.grad.data()[i];
    EXPECT_NEAR(p.value.data()[i], -0.01 * g / (std::abs(g) + 1e-8), 1e-12);
  }
}

TEST(AdamTest, ColumnSlotTouchesOnlyItsColumns) {
  Param p(Mat::Ones(2, 4));
  p.grad.setOnes();
  const Mat before = p.value;
  Adam adam({TrainableSlot{"p", &p, 3, 1}}, AdamConfig{0.1});
  adam.Step();
  EXPECT_EQ(p.value.leftCols(3), before.leftCols(3));
  EXPECT_NE(p.value(0, 3), before(0, 3));
}

TEST(AdamTest, ClipGradNormRescalesToTheLimit) {
  Param p(Mat::Zero(1, 2));
  p.grad << 3.0, 4.0;
  Adam adam(SlotsFor({{"p", &p}}), AdamConfig{});
  EXPECT_DOUBLE_EQ(adam.ClipGradNorm(1.0), 5.0);
  EXPECT_NEAR(adam.GradNorm(), 1.0, 1e-12);
}

}  // namespace
}  // namespace tsex
