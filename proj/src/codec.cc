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

#include "tsex/codec.h"

#include <cmath>

#include "tsex/errors.h"

namespace tsex {
namespace {

using FrameView = Eigen::Map<const Mat, 0, Eigen::OuterStride<>>;
using MutableFrameView = Eigen::Map<Mat, 0, Eigen::OuterStride<>>;

}  // namespace

int NumFrames(std::size_t length, int frame_length, int hop) {
  Require(length >= static_cast<std::size_t>(frame_length),
          ErrorCategory::kLength,
          "input of " + std::to_string(length) +
              " samples is shorter than one frame (" +
              std::to_string(frame_length) + ")");
  const std::size_t extra = length - static_cast<std::size_t>(frame_length);
  return static_cast<int>((extra + static_cast<std::size_t>(hop) - 1) /
                          static_cast<std::size_t>(hop)) +
         1;
}

std::size_t PaddedLength(int frames, int frame_length, int hop) {
  return static_cast<std::size_t>(frames - 1) * static_cast<std::size_t>(hop) +
         static_cast<std::size_t>(frame_length);
}

Mat ApplyMask(const Mat& features, const Mat& mask) {
  Require(features.rows() == mask.rows() && features.cols() == mask.cols(),
          ErrorCategory::kShape,
          "mask shape " + std::to_string(mask.rows()) + "x" +
              std::to_string(mask.cols()) + " does not match features " +
              std::to_string(features.rows()) + "x" +
              std::to_string(features.cols()));
  return features.cwiseProduct(mask);
}

// ---------------------------------------------------------------- Encoder

Encoder::Encoder(const CodecConfig& config, Rng& rng)
    : config_(config),
      weight_(GaussianMatrix(config.feature_dim, config.frame_length,
                             1.0 / std::sqrt(config.frame_length), rng)) {
  Require(config.feature_dim > 0 && config.frame_length > 0 && config.hop > 0 &&
              config.hop <= config.frame_length,
          ErrorCategory::kConfig, "invalid codec geometry");
}

Mat Encoder::Forward(const Vec& samples, Cache* cache) const {
  const int frames = NumFrames(static_cast<std::size_t>(samples.size()),
                               config_.frame_length, config_.hop);
  Vec padded = Vec::Zero(static_cast<Eigen::Index>(
      PaddedLength(frames, config_.frame_length, config_.hop)));
  padded.head(samples.size()) = samples;
  const FrameView framed(padded.data(), config_.frame_length, frames,
                         Eigen::OuterStride<>(config_.hop));
  Mat pre = weight_.value * framed;
  Mat out = rectify_ ? Relu(pre) : pre;
  if (cache != nullptr) {
    cache->padded = std::move(padded);
    cache->pre_activation = std::move(pre);
  }
  return out;
}

Vec Encoder::Backward(const Cache& cache, const Mat& dy,
                      std::size_t input_length) {
  const Mat dpre = rectify_ ? ReluBackward(cache.pre_activation, dy) : dy;
  const auto frames = static_cast<Eigen::Index>(dpre.cols());
  const FrameView framed(cache.padded.data(), config_.frame_length, frames,
                         Eigen::OuterStride<>(config_.hop));
  if (!frozen_) weight_.grad.noalias() += dpre * framed.transpose();
  const Mat dframes = weight_.value.transpose() * dpre;
  Vec dpadded = Vec::Zero(cache.padded.size());
  for (Eigen::Index t = 0; t < frames; ++t) {
    dpadded.segment(t * config_.hop, config_.frame_length) += dframes.col(t);
  }
  return dpadded.head(static_cast<Eigen::Index>(input_length));
}

void Encoder::CollectParams(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".basis", &weight_});
}

// ---------------------------------------------------------------- Decoder

Decoder::Decoder(const CodecConfig& config, Rng& rng)
    : config_(config),
      weight_(GaussianMatrix(config.frame_length, config.feature_dim,
                             1.0 / std::sqrt(config.feature_dim), rng)) {}

void Decoder::CheckTargetLength(Eigen::Index frames,
                                std::size_t target_length) const {
  Require(frames > 0, ErrorCategory::kLength, "no frames to decode");
  const std::size_t span = PaddedLength(static_cast<int>(frames),
                                        config_.frame_length, config_.hop);
  Require(target_length <= span &&
              span - target_length < static_cast<std::size_t>(config_.hop),
          ErrorCategory::kLength,
          "target length " + std::to_string(target_length) +
              " inconsistent with " + std::to_string(frames) + " frames");
}

Vec Decoder::Forward(const Mat& features, std::size_t target_length) const {
  Require(features.rows() == weight_.value.cols(), ErrorCategory::kShape,
          "decoder expects " + std::to_string(weight_.value.cols()) +
              " feature channels");
  CheckTargetLength(features.cols(), target_length);
  const Mat frames = weight_.value * features;
  Vec out = Vec::Zero(static_cast<Eigen::Index>(PaddedLength(
      static_cast<int>(features.cols()), config_.frame_length, config_.hop)));
  for (Eigen::Index t = 0; t < frames.cols(); ++t) {
    out.segment(t * config_.hop, config_.frame_length) += frames.col(t);
  }
  out.conservativeResize(static_cast<Eigen::Index>(target_length));
  return out;
}

Mat Decoder::Backward(const Mat& features, const Vec& dy) {
  const Eigen::Index frames = features.cols();
  Vec dpadded = Vec::Zero(static_cast<Eigen::Index>(
      PaddedLength(static_cast<int>(frames), config_.frame_length, config_.hop)));
  dpadded.head(dy.size()) = dy;
  const FrameView dframes(dpadded.data(), config_.frame_length, frames,
                          Eigen::OuterStride<>(config_.hop));
  if (!frozen_) weight_.grad.noalias() += dframes * features.transpose();
  return weight_.value.transpose() * dframes;
}

void Decoder::CollectParams(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".basis", &weight_});
}

}  // namespace tsex
