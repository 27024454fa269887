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

#include "gtest/gtest.h"
#include "test_util.h"
#include "tsex/errors.h"
#include "tsex/extraction.h"
#include "tsex/model.h"

namespace tsex {
namespace {

using testing::RandomMat;
using testing::RandomVec;
using testing::RelativeError;
using testing::ThrownCategory;
using testing::TinyModelConfig;

Extractor TinyExtractor(std::uint64_t seed) {
  const ModelConfig c = TinyModelConfig();
  Rng rng(seed);
  return Extractor(c.codec, c.extractor, rng);
}

TEST(AdaptTest, ScalesEachFeatureRow) {
  Rng rng(1);
  const Mat z = RandomMat(4, 6, rng);
  EXPECT_EQ(Adapt(z, Vec::Ones(4)), z);
  EXPECT_EQ(Adapt(z, Vec::Zero(4)), Mat::Zero(4, 6));
  Vec e(4);
  e << 1.0, -2.0, 0.5, 3.0;
  const Mat out = Adapt(z, e);
  for (int d = 0; d < 4; ++d) {
    for (int t = 0; t < 6; ++t) EXPECT_DOUBLE_EQ(out(d, t), z(d, t) * e[d]);
  }
  EXPECT_EQ(ThrownCategory([&] { Adapt(z, Vec::Ones(3)); }),
            ErrorCategory::kShape);
}

TEST(ExtractorTest, MixtureStackIgnoresTheClue) {
  Extractor ex = TinyExtractor(2);
  Rng rng(3);
  const Vec y = RandomVec(64, rng);
  Extractor::Cache a, b;
  ex.Forward(y, RandomVec(8, rng), &a);
  ex.Forward(y, RandomVec(8, rng), &b);
  EXPECT_EQ(a.mixture_repr, b.mixture_repr);
  EXPECT_EQ(a.mixture_repr, ex.ExtMix(ex.Encode(y)));
  EXPECT_NE(a.tgt.mask, b.tgt.mask);
}

TEST(ExtractorTest, MaskInUnitRangeAndOutputKeepsLength) {
  Extractor ex = TinyExtractor(4);
  Rng rng(5);
  for (std::size_t length : {8u, 13u, 4800u}) {
    const Vec y = RandomVec(static_cast<Eigen::Index>(length), rng);
    Extractor::Cache cache;
    const Vec out = ex.Forward(y, RandomVec(8, rng, 3.0), &cache);
    EXPECT_EQ(static_cast<std::size_t>(out.size()), length);
    EXPECT_GE(cache.tgt.mask.minCoeff(), 0.0);
    EXPECT_LE(cache.tgt.mask.maxCoeff(), 1.0);
    EXPECT_EQ(cache.tgt.mask.rows(), cache.features.rows());
    EXPECT_EQ(cache.tgt.mask.cols(), cache.features.cols());
  }
}

TEST(ExtractorTest, RejectsWrongEmbeddingSizeAndShortInput) {
  Extractor ex = TinyExtractor(6);
  EXPECT_EQ(ThrownCategory([&] { ex.Forward(Vec::Ones(32), Vec::Ones(7), nullptr); }),
            ErrorCategory::kShape);
  EXPECT_EQ(ThrownCategory([&] { ex.Forward(Vec::Ones(7), Vec::Ones(8), nullptr); }),
            ErrorCategory::kLength);
}

TEST(ExtractorTest, SameSeedSameOutput) {
  Extractor a = TinyExtractor(7);
  Extractor b = TinyExtractor(7);
  Extractor c = TinyExtractor(8);
  Rng rng(9);
  const Vec y = RandomVec(50, rng);
  const Vec e = RandomVec(8, rng);
  EXPECT_EQ(a.Forward(y, e, nullptr), b.Forward(y, e, nullptr));
  EXPECT_EQ(a.Forward(y, e, nullptr), a.Forward(y, e, nullptr));
  EXPECT_NE(a.Forward(y, e, nullptr), c.Forward(y, e, nullptr));
}

TEST(ExtractorTest, CountsForwardCalls) {
  Extractor ex = TinyExtractor(10);
  ex.Forward(Vec::Ones(16), Vec::Ones(8), nullptr);
  ex.Forward(Vec::Ones(16), Vec::Ones(8), nullptr);
  EXPECT_EQ(ex.forward_count(), 2u);
  ex.ResetForwardCount();
  EXPECT_EQ(ex.forward_count(), 0u);
}

// Probe loss <R, f(y, clue)> over the whole model.
struct ModelProbe {
  TseModel* model;
  Vec mixture;
  Clue clue;
  Vec probe;

  double operator()() const {
    return probe.dot(model->Forward(mixture, clue, nullptr));
  }
};

void CheckModelGradients(TseModel& model, const Clue& clue, Rng& rng,
                         const std::string& only_prefix = "") {
  ModelProbe f{&model, RandomVec(40, rng), clue, RandomVec(40, rng)};
  ParamList params = model.Params();
  ZeroGrads(params);
  TseModel::Pass pass;
  model.Forward(f.mixture, clue, &pass);
  model.Backward(pass, f.probe);
  int checked = 0;
  for (const auto& p : params) {
    if (!only_prefix.empty() && p.name.rfind(only_prefix, 0) != 0) continue;
    const auto entries = testing::SampleEntries(p.param->value.size(), 12, rng);
    const Vec num = testing::NumericParamGradient(f, p.param, 1e-6, entries);
    const Vec ana = testing::Gather(p.param->grad, entries);
    if (num.norm() < 1e-10 && ana.norm() < 1e-10) continue;
    EXPECT_LT(RelativeError(ana, num), 1e-5) << p.name;
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(TseModelTest, ClassClueGradientsMatchFiniteDifferences) {
  TseModel model(TinyModelConfig(), testing::ThreeClasses(), 11);
  Rng rng(12);
  CheckModelGradients(model, LabelSet::Of({0, 2}), rng);
}

TEST(TseModelTest, EnrollmentClueGradientsReachTheEnrollmentEncoder) {
  TseModel model(TinyModelConfig(), testing::ThreeClasses(), 13);
  Rng rng(14);
  EnrollmentSet enroll{{Waveform(RandomVec(32, rng, 0.3)),
                        Waveform(RandomVec(24, rng, 0.3))}};
  CheckModelGradients(model, enroll, rng, "enrollment.");
}

TEST(TseModelTest, ClassClueLeavesUnusedColumnsUntouched) {
  TseModel model(TinyModelConfig(), testing::ThreeClasses(), 15);
  Rng rng(16);
  ParamList params = model.Params();
  ZeroGrads(params);
  TseModel::Pass pass;
  model.Forward(RandomVec(40, rng), LabelSet::Of({1}), &pass);
  model.Backward(pass, RandomVec(40, rng));
  const Mat& g = model.embeddings().param().grad;
  EXPECT_EQ(g.col(0).norm(), 0.0);
  EXPECT_EQ(g.col(2).norm(), 0.0);
  EXPECT_GT(g.col(1).norm(), 0.0);
}

// Freezing covers the layers; the class table keeps its gradient so new
// columns can still be fitted.
TEST(TseModelTest, FrozenLayersLeaveOnlyTheClassTableGradient) {
  TseModel model(TinyModelConfig(), testing::ThreeClasses(), 17);
  model.SetAllFrozen(true);
  Rng rng(18);
  ParamList params = model.Params();
  ZeroGrads(params);
  TseModel::Pass pass;
  model.Forward(RandomVec(40, rng), LabelSet::Of({0}), &pass);
  model.Backward(pass, RandomVec(40, rng));
  for (const auto& p : params) {
    if (p.name == "class_embedding.matrix") {
      EXPECT_GT(p.param->grad.norm(), 0.0);
    } else {
      EXPECT_EQ(p.param->grad.norm(), 0.0) << p.name;
    }
  }
}

TEST(TseModelTest, SaveLoadRoundTripIsExact) {
  TseModel model(TinyModelConfig(), testing::ThreeClasses(), 19);
  model.metadata["epoch"] = 3;
  const auto path = std::filesystem::temp_directory_path() / "tsex_model_rt.ckpt";
  model.Save(path);
  const TseModel loaded = TseModel::Load(path);
  std::filesystem::remove(path);
  Rng rng(20);
  const Waveform y(RandomVec(48, rng));
  EXPECT_EQ(loaded.Extract(y, LabelSet::Of({1})).samples(),
            model.Extract(y, LabelSet::Of({1})).samples());
  EXPECT_EQ(loaded.vocabulary(), model.vocabulary());
  EXPECT_EQ(loaded.metadata["epoch"], 3);
}

TEST(TseModelTest, ExtractValidatesTheClue) {
  TseModel model(TinyModelConfig(), testing::ThreeClasses(), 21);
  const Waveform y = Waveform::Zeros(40);
  EXPECT_EQ(ThrownCategory([&] { model.Extract(y, LabelSet::Of({3})); }),
            ErrorCategory::kVocabulary);
  EXPECT_EQ(ThrownCategory([&] { model.Extract(y, EnrollmentSet{}); }),
            ErrorCategory::kPrecondition);
}

}  // namespace
}  // namespace tsex
