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

#ifndef TSEX_CODEC_H_
#define TSEX_CODEC_H_

// Learned analysis/synthesis transform. The encoder frames the signal
// (frame_length taps, hop samples), applies a bias-free linear basis and a
// rectifier; the decoder applies a linear synthesis basis and overlap-adds.
// Inputs are zero-padded at the tail to a whole number of frames and the
// decoder trims back to the requested length.

#include <cstddef>
#include <string>

#include "tsex/nn.h"

namespace tsex {

struct CodecConfig {
  int feature_dim = 64;
  int frame_length = 16;
  int hop = 8;
};

// Frame count after tail padding; equals (T - L) / hop + 1 when that divides.
int NumFrames(std::size_t length, int frame_length, int hop);
std::size_t PaddedLength(int frames, int frame_length, int hop);

// out[d, t] = features[d, t] * mask[d, t].
Mat ApplyMask(const Mat& features, const Mat& mask);

class Encoder {
 public:
  struct Cache {
    Vec padded;
    Mat pre_activation;
  };

  Encoder() = default;
  Encoder(const CodecConfig& config, Rng& rng);

  Mat Forward(const Vec& samples, Cache* cache) const;
  // Accumulates the basis gradient and returns d(loss)/d(samples).
  Vec Backward(const Cache& cache, const Mat& dy, std::size_t input_length);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen) { frozen_ = frozen; }
  // The rectifier can be switched off to expose the linear part.
  void set_rectify(bool rectify) { rectify_ = rectify; }

  Param& basis() { return weight_; }
  const CodecConfig& config() const { return config_; }

 private:
  CodecConfig config_;
  Param weight_;  // feature_dim x frame_length
  bool rectify_ = true;
  bool frozen_ = false;
};

class Decoder {
 public:
  Decoder() = default;
  Decoder(const CodecConfig& config, Rng& rng);

  Vec Forward(const Mat& features, std::size_t target_length) const;
  // Accumulates the basis gradient and returns d(loss)/d(features).
  Mat Backward(const Mat& features, const Vec& dy);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen) { frozen_ = frozen; }

  Param& basis() { return weight_; }

 private:
  void CheckTargetLength(Eigen::Index frames, std::size_t target_length) const;

  CodecConfig config_;
  Param weight_;  // frame_length x feature_dim
  bool frozen_ = false;
};

}  // namespace tsex

#endif  // TSEX_CODEC_H_
