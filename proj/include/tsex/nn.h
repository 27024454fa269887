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

#ifndef TSEX_NN_H_
#define TSEX_NN_H_

// Layer primitives with explicit forward/backward passes. Feature maps are
// channels x frames matrices. Forward passes are const and reentrant; the
// per-call state needed by Backward lives in caller-owned caches. Backward
// accumulates into Param::grad unless the layer is frozen.

#include <string>
#include <vector>

#include "tsex/rng.h"
#include "tsex/types.h"

namespace tsex {

struct Param {
  Mat value;
  Mat grad;

  Param() = default;
  explicit Param(Mat initial)
      : value(std::move(initial)), grad(Mat::Zero(value.rows(), value.cols())) {}

  void ZeroGrad() { grad.setZero(); }
};

struct NamedParam {
  std::string name;
  Param* param;
};
using ParamList = std::vector<NamedParam>;

// Zero-mean Gaussian matrix with the given standard deviation.
Mat GaussianMatrix(int rows, int cols, double stddev, Rng& rng);

class Conv1x1 {
 public:
  Conv1x1() = default;
  Conv1x1(int in_channels, int out_channels, bool bias, Rng& rng);

  Mat Forward(const Mat& x) const;
  Mat Backward(const Mat& x, const Mat& dy);
  // Input gradient only; parameter gradients are left alone.
  Mat InputGradient(const Mat& dy) const;

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen) { frozen_ = frozen; }

  int in_channels() const { return static_cast<int>(weight_.value.cols()); }
  int out_channels() const { return static_cast<int>(weight_.value.rows()); }

 private:
  Param weight_;
  Param bias_;
  bool has_bias_ = false;
  bool frozen_ = false;
};

// Per-channel dilated convolution with zero "same" padding. Kernel size
// must be odd.
class DepthwiseConv {
 public:
  DepthwiseConv() = default;
  DepthwiseConv(int channels, int kernel_size, int dilation, Rng& rng);

  Mat Forward(const Mat& x) const;
  Mat Backward(const Mat& x, const Mat& dy);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen) { frozen_ = frozen; }

 private:
  int Offset(int tap) const;

  Param weight_;  // channels x kernel
  Param bias_;
  int dilation_ = 1;
  bool frozen_ = false;
};

// Full 1-D convolution over time, "same" padding, odd kernel.
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(int in_channels, int out_channels, int kernel_size, Rng& rng);

  Mat Forward(const Mat& x) const;
  Mat Backward(const Mat& x, const Mat& dy);
  // Input gradient only; parameter gradients are left alone.
  Mat InputGradient(const Mat& dy) const;

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen) { frozen_ = frozen; }

 private:
  Param weight_;  // out x (kernel * in), tap-major
  Param bias_;
  int in_channels_ = 0;
  int kernel_size_ = 1;
  bool frozen_ = false;
};

// Parametric rectifier with one shared slope.
class PRelu {
 public:
  PRelu();

  Mat Forward(const Mat& x) const;
  Mat Backward(const Mat& x, const Mat& dy);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen) { frozen_ = frozen; }

 private:
  Param slope_;
  bool frozen_ = false;
};

// Normalizes over all channels and frames jointly, then applies a
// per-channel affine transform.
class GlobalLayerNorm {
 public:
  struct Cache {
    Mat normalized;
    double inv_std = 0.0;
  };

  GlobalLayerNorm() = default;
  explicit GlobalLayerNorm(int channels);

  Mat Forward(const Mat& x, Cache* cache) const;
  Mat Backward(const Cache& cache, const Mat& dy);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen) { frozen_ = frozen; }

 private:
  static constexpr double kEps = 1e-8;
  Param gamma_;
  Param beta_;
  bool frozen_ = false;
};

Mat Relu(const Mat& x);
Mat ReluBackward(const Mat& x, const Mat& dy);
Mat Sigmoid(const Mat& x);
// Gradient through a sigmoid given its output.
Mat SigmoidBackward(const Mat& y, const Mat& dy);

// Residual depthwise-separable block: 1x1 expand, PReLU, gLN, dilated
// depthwise conv, PReLU, gLN, 1x1 project, plus the identity path.
class TcnBlock {
 public:
  struct Cache {
    Mat input;
    Mat expanded;
    GlobalLayerNorm::Cache norm1;
    Mat normalized1;
    Mat depthwise;
    GlobalLayerNorm::Cache norm2;
    Mat normalized2;
  };

  TcnBlock() = default;
  TcnBlock(int channels, int hidden, int kernel_size, int dilation, Rng& rng);

  Mat Forward(const Mat& x, Cache* cache) const;
  Mat Backward(const Cache& cache, const Mat& dy);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen);

 private:
  Conv1x1 expand_;
  PRelu act1_;
  GlobalLayerNorm norm1_;
  DepthwiseConv depthwise_;
  PRelu act2_;
  GlobalLayerNorm norm2_;
  Conv1x1 project_;
};

struct TcnConfig {
  int channels = 64;     // bottleneck width
  int hidden = 128;      // expanded width inside a block
  int kernel_size = 3;
  int blocks = 4;        // per repeat; dilation doubles per block
  int repeats = 1;
};

class TcnStack {
 public:
  using Cache = std::vector<TcnBlock::Cache>;

  TcnStack() = default;
  TcnStack(const TcnConfig& config, Rng& rng);

  Mat Forward(const Mat& x, Cache* cache) const;
  Mat Backward(const Cache& cache, const Mat& dy);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen);
  int num_blocks() const { return static_cast<int>(blocks_.size()); }

 private:
  std::vector<TcnBlock> blocks_;
};

void ZeroGrads(const ParamList& params);
double GradNormSquared(const ParamList& params);
// Subset of `params` whose names start with `prefix`.
ParamList FilterByPrefix(const ParamList& params, const std::string& prefix);

}  // namespace tsex

#endif  // TSEX_NN_H_
