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

#include "tsex/nn.h"

#include <algorithm>
#include <cmath>

#include "tsex/errors.h"

namespace tsex {
namespace {

void RequireChannels(const Mat& x, Eigen::Index channels, const char* layer) {
  Require(x.rows() == channels, ErrorCategory::kShape,
          std::string(layer) + ": expected " + std::to_string(channels) +
              " channels, got " + std::to_string(x.rows()));
}

// Valid output column range for a tap reading input column t + offset.
void TapRange(Eigen::Index frames, int offset, Eigen::Index* begin,
              Eigen::Index* count) {
  *begin = std::max<Eigen::Index>(0, -offset);
  const Eigen::Index end = std::min<Eigen::Index>(frames, frames - offset);
  *count = std::max<Eigen::Index>(0, end - *begin);
}

}  // namespace

Mat GaussianMatrix(int rows, int cols, double stddev, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = stddev * rng.Normal();
  }
  return m;
}

// ---------------------------------------------------------------- Conv1x1

Conv1x1::Conv1x1(int in_channels, int out_channels, bool bias, Rng& rng)
    : weight_(GaussianMatrix(out_channels, in_channels,
                             1.0 / std::sqrt(static_cast<double>(in_channels)),
                             rng)),
      bias_(Mat::Zero(out_channels, 1)),
      has_bias_(bias) {}

Mat Conv1x1::Forward(const Mat& x) const {
  RequireChannels(x, weight_.value.cols(), "conv1x1");
  Mat y = weight_.value * x;
  if (has_bias_) y.colwise() += bias_.value.col(0);
  return y;
}

Mat Conv1x1::Backward(const Mat& x, const Mat& dy) {
  if (!frozen_) {
    weight_.grad.noalias() += dy * x.transpose();
    if (has_bias_) bias_.grad.col(0) += dy.rowwise().sum();
  }
  return InputGradient(dy);
}

Mat Conv1x1::InputGradient(const Mat& dy) const {
  return weight_.value.transpose() * dy;
}

void Conv1x1::CollectParams(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".weight", &weight_});
  if (has_bias_) out->push_back({prefix + ".bias", &bias_});
}

// ---------------------------------------------------------- DepthwiseConv

DepthwiseConv::DepthwiseConv(int channels, int kernel_size, int dilation,
                             Rng& rng)
    : weight_(GaussianMatrix(channels, kernel_size,
                             1.0 / std::sqrt(static_cast<double>(kernel_size)),
                             rng)),
      bias_(Mat::Zero(channels, 1)),
      dilation_(dilation) {
  Require(kernel_size % 2 == 1, ErrorCategory::kConfig,
          "depthwise kernel size must be odd");
}

int DepthwiseConv::Offset(int tap) const {
  const int half = static_cast<int>(weight_.value.cols() - 1) / 2;
  return (tap - half) * dilation_;
}

Mat DepthwiseConv::Forward(const Mat& x) const {
  RequireChannels(x, weight_.value.rows(), "depthwise");
  const Eigen::Index frames = x.cols();
  Mat y(x.rows(), frames);
  y.colwise() = bias_.value.col(0);
  for (int k = 0; k < weight_.value.cols(); ++k) {
    const int offset = Offset(k);
    Eigen::Index begin, count;
    TapRange(frames, offset, &begin, &count);
    if (count == 0) continue;
    y.middleCols(begin, count).array() +=
        x.middleCols(begin + offset, count).array().colwise() *
        weight_.value.col(k).array();
  }
  return y;
}

Mat DepthwiseConv::Backward(const Mat& x, const Mat& dy) {
  const Eigen::Index frames = x.cols();
  Mat dx = Mat::Zero(x.rows(), frames);
  for (int k = 0; k < weight_.value.cols(); ++k) {
    const int offset = Offset(k);
    Eigen::Index begin, count;
    TapRange(frames, offset, &begin, &count);
    if (count == 0) continue;
    dx.middleCols(begin + offset, count).array() +=
        dy.middleCols(begin, count).array().colwise() *
        weight_.value.col(k).array();
    if (!frozen_) {
      weight_.grad.col(k) +=
          (dy.middleCols(begin, count).array() *
           x.middleCols(begin + offset, count).array())
              .matrix()
              .rowwise()
              .sum();
    }
  }
  if (!frozen_) bias_.grad.col(0) += dy.rowwise().sum();
  return dx;
}

void DepthwiseConv::CollectParams(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".weight", &weight_});
  out->push_back({prefix + ".bias", &bias_});
}

// ----------------------------------------------------------------- Conv1d

Conv1d::Conv1d(int in_channels, int out_channels, int kernel_size, Rng& rng)
    : weight_(GaussianMatrix(
          out_channels, in_channels * kernel_size,
          1.0 / std::sqrt(static_cast<double>(in_channels * kernel_size)),
          rng)),
      bias_(Mat::Zero(out_channels, 1)),
      in_channels_(in_channels),
      kernel_size_(kernel_size) {
  Require(kernel_size % 2 == 1, ErrorCategory::kConfig,
          "conv1d kernel size must be odd");
}

Mat Conv1d::Forward(const Mat& x) const {
  RequireChannels(x, in_channels_, "conv1d");
  const Eigen::Index frames = x.cols();
  Mat y(weight_.value.rows(), frames);
  y.colwise() = bias_.value.col(0);
  const int half = (kernel_size_ - 1) / 2;
  for (int k = 0; k < kernel_size_; ++k) {
    const int offset = k - half;
    Eigen::Index begin, count;
    TapRange(frames, offset, &begin, &count);
    if (count == 0) continue;
    y.middleCols(begin, count).noalias() +=
        weight_.value.middleCols(k * in_channels_, in_channels_) *
        x.middleCols(begin + offset, count);
  }
  return y;
}

Mat Conv1d::Backward(const Mat& x, const Mat& dy) {
  if (!frozen_) {
    const Eigen::Index frames = x.cols();
    const int half = (kernel_size_ - 1) / 2;
    for (int k = 0; k < kernel_size_; ++k) {
      const int offset = k - half;
      Eigen::Index begin, count;
      TapRange(frames, offset, &begin, &count);
      if (count == 0) continue;
      weight_.grad.middleCols(k * in_channels_, in_channels_).noalias() +=
          dy.middleCols(begin, count) *
          x.middleCols(begin + offset, count).transpose();
    }
    bias_.grad.col(0) += dy.rowwise().sum();
  }
  return InputGradient(dy);
}

Mat Conv1d::InputGradient(const Mat& dy) const {
  const Eigen::Index frames = dy.cols();
  Mat dx = Mat::Zero(in_channels_, frames);
  const int half = (kernel_size_ - 1) / 2;
  for (int k = 0; k < kernel_size_; ++k) {
    const int offset = k - half;
    Eigen::Index begin, count;
    TapRange(frames, offset, &begin, &count);
    if (count == 0) continue;
    dx.middleCols(begin + offset, count).noalias() +=
        weight_.value.middleCols(k * in_channels_, in_channels_).transpose() *
        dy.middleCols(begin, count);
  }
  return dx;
}

void Conv1d::CollectParams(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".weight", &weight_});
  out->push_back({prefix + ".bias", &bias_});
}

// ------------------------------------------------------------------ PRelu

PRelu::PRelu() : slope_(Mat::Constant(1, 1, 0.25)) {}

Mat PRelu::Forward(const Mat& x) const {
  const double a = slope_.value(0, 0);
  return x.unaryExpr([a](double v) { return v > 0.0 ? v : a * v; });
}

Mat PRelu::Backward(const Mat& x, const Mat& dy) {
  const double a = slope_.value(0, 0);
  if (!frozen_) {
    slope_.grad(0, 0) += (dy.array() * x.array().min(0.0)).sum();
  }
  return dy.binaryExpr(x, [a](double g, double v) { return v > 0.0 ? g : a * g; });
}

void PRelu::CollectParams(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".slope", &slope_});
}

// -------------------------------------------------------- GlobalLayerNorm

GlobalLayerNorm::GlobalLayerNorm(int channels)
    : gamma_(Mat::Ones(channels, 1)), beta_(Mat::Zero(channels, 1)) {}

Mat GlobalLayerNorm::Forward(const Mat& x, Cache* cache) const {
  RequireChannels(x, gamma_.value.rows(), "gLN");
  const double n = static_cast<double>(x.size());
  const double mean = x.sum() / n;
  const double var = (x.array() - mean).square().sum() / n;
  const double inv_std = 1.0 / std::sqrt(var + kEps);
  Mat normalized = (x.array() - mean) * inv_std;
  Mat y = (normalized.array().colwise() * gamma_.value.col(0).array())
              .colwise() +
          beta_.value.col(0).array();
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = inv_std;
  }
  return y;
}

Mat GlobalLayerNorm::Backward(const Cache& cache, const Mat& dy) {
  const Mat& xhat = cache.normalized;
  if (!frozen_) {
    gamma_.grad.col(0) += (dy.array() * xhat.array()).matrix().rowwise().sum();
    beta_.grad.col(0) += dy.rowwise().sum();
  }
  const Mat dxhat = dy.array().colwise() * gamma_.value.col(0).array();
  const double n = static_cast<double>(dy.size());
  const double mean_dxhat = dxhat.sum() / n;
  const double mean_dxhat_xhat = (dxhat.array() * xhat.array()).sum() / n;
  return cache.inv_std *
         (dxhat.array() - mean_dxhat - xhat.array() * mean_dxhat_xhat).matrix();
}

void GlobalLayerNorm::CollectParams(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".gamma", &gamma_});
  out->push_back({prefix + ".beta", &beta_});
}

// ------------------------------------------------------------ activations

Mat Relu(const Mat& x) { return x.cwiseMax(0.0); }

Mat ReluBackward(const Mat& x, const Mat& dy) {
  return dy.binaryExpr(x, [](double g, double v) { return v > 0.0 ? g : 0.0; });
}

Mat Sigmoid(const Mat& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Mat SigmoidBackward(const Mat& y, const Mat& dy) {
  return (dy.array() * y.array() * (1.0 - y.array())).matrix();
}

// --------------------------------------------------------------- TcnBlock

TcnBlock::TcnBlock(int channels, int hidden, int kernel_size, int dilation,
                   Rng& rng)
    : expand_(channels, hidden, true, rng),
      norm1_(hidden),
      depthwise_(hidden, kernel_size, dilation, rng),
      norm2_(hidden),
      project_(hidden, channels, true, rng) {}

Mat TcnBlock::Forward(const Mat& x, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.input = x;
  c.expanded = expand_.Forward(x);
  c.normalized1 = norm1_.Forward(act1_.Forward(c.expanded), &c.norm1);
  c.depthwise = depthwise_.Forward(c.normalized1);
  c.normalized2 = norm2_.Forward(act2_.Forward(c.depthwise), &c.norm2);
  return x + project_.Forward(c.normalized2);
}

Mat TcnBlock::Backward(const Cache& cache, const Mat& dy) {
  Mat grad = project_.Backward(cache.normalized2, dy);
  grad = norm2_.Backward(cache.norm2, grad);
  grad = act2_.Backward(cache.depthwise, grad);
  grad = depthwise_.Backward(cache.normalized1, grad);
  grad = norm1_.Backward(cache.norm1, grad);
  grad = act1_.Backward(cache.expanded, grad);
  grad = expand_.Backward(cache.input, grad);
  return grad + dy;
}

void TcnBlock::CollectParams(const std::string& prefix, ParamList* out) {
  expand_.CollectParams(prefix + ".expand", out);
  act1_.CollectParams(prefix + ".act1", out);
  norm1_.CollectParams(prefix + ".norm1", out);
  depthwise_.CollectParams(prefix + ".depthwise", out);
  act2_.CollectParams(prefix + ".act2", out);
  norm2_.CollectParams(prefix + ".norm2", out);
  project_.CollectParams(prefix + ".project", out);
}

void TcnBlock::set_frozen(bool frozen) {
  expand_.set_frozen(frozen);
  act1_.set_frozen(frozen);
  norm1_.set_frozen(frozen);
  depthwise_.set_frozen(frozen);
  act2_.set_frozen(frozen);
  norm2_.set_frozen(frozen);
  project_.set_frozen(frozen);
}

// --------------------------------------------------------------- TcnStack

TcnStack::TcnStack(const TcnConfig& config, Rng& rng) {
  Require(config.channels > 0 && config.hidden > 0 && config.blocks > 0 &&
              config.repeats > 0 && config.kernel_size > 0,
          ErrorCategory::kConfig, "TCN dimensions must be positive");
  for (int r = 0; r < config.repeats; ++r) {
    for (int b = 0; b < config.blocks; ++b) {
      blocks_.emplace_back(config.channels, config.hidden, config.kernel_size,
                           1 << b, rng);
    }
  }
}

Mat TcnStack::Forward(const Mat& x, Cache* cache) const {
  if (cache != nullptr) cache->resize(blocks_.size());
  Mat h = x;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    h = blocks_[i].Forward(h, cache != nullptr ? &(*cache)[i] : nullptr);
  }
  return h;
}

Mat TcnStack::Backward(const Cache& cache, const Mat& dy) {
  Mat grad = dy;
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    grad = blocks_[i].Backward(cache[i], grad);
  }
  return grad;
}

void TcnStack::CollectParams(const std::string& prefix, ParamList* out) {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].CollectParams(prefix + ".block" + std::to_string(i), out);
  }
}

void TcnStack::set_frozen(bool frozen) {
  for (auto& block : blocks_) block.set_frozen(frozen);
}

// ---------------------------------------------------------------- helpers

void ZeroGrads(const ParamList& params) {
  for (const auto& p : params) p.param->ZeroGrad();
}

double GradNormSquared(const ParamList& params) {
  double total = 0.0;
  for (const auto& p : params) total += p.param->grad.squaredNorm();
  return total;
}

ParamList FilterByPrefix(const ParamList& params, const std::string& prefix) {
  ParamList out;
  for (const auto& p : params) {
    if (p.name.rfind(prefix, 0) == 0) out.push_back(p);
  }
  return out;
}

}  // namespace tsex
