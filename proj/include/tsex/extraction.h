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

#ifndef TSEX_EXTRACTION_H_
#define TSEX_EXTRACTION_H_

#include <atomic>
#include <cstdint>
#include <string>

#include "tsex/codec.h"
#include "tsex/nn.h"

namespace tsex {

struct ExtractorConfig {
  int feature_dim = 64;   // D
  int bottleneck = 64;    // B
  int hidden = 128;       // H
  int kernel_size = 3;    // P
  int blocks = 4;         // X, dilations 1, 2, ..., 2^(X-1)
  int mix_repeats = 1;    // R for the clue-independent stack
  int tgt_repeats = 2;    // R for the mask stack

  static ExtractorConfig Full();
  static ExtractorConfig Toy();
  void Validate() const;
};

// Copyable forward-call counter used for instrumentation.
class CallCounter {
 public:
  CallCounter() = default;
  CallCounter(const CallCounter& other) : count_(other.count()) {}
  CallCounter& operator=(const CallCounter& other) {
    count_.store(other.count());
    return *this;
  }
  void Increment() const { count_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }
  void Reset() { count_.store(0); }

 private:
  mutable std::atomic<std::uint64_t> count_{0};
};

// gLN -> 1x1 (D->B) -> TCN -> 1x1 (B->D). Used both as the clue-independent
// lower extraction stack and as the enrollment summary network.
class MixtureNet {
 public:
  struct Cache {
    GlobalLayerNorm::Cache norm;
    Mat normalized;
    Mat bottleneck;
    TcnStack::Cache tcn;
    Mat tcn_out;
  };

  MixtureNet() = default;
  MixtureNet(int feature_dim, const TcnConfig& tcn, Rng& rng);

  Mat Forward(const Mat& x, Cache* cache) const;
  Mat Backward(const Cache& cache, const Mat& dy);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen);

 private:
  GlobalLayerNorm norm_;
  Conv1x1 in_proj_;
  TcnStack tcn_;
  Conv1x1 out_proj_;
};

// 1x1 (D->B) -> TCN -> PReLU -> 1x1 (B -> masks*D) -> logistic. Emits
// `num_masks` stacked D x T' masks with entries in [0, 1].
class MaskNet {
 public:
  struct Cache {
    Mat input;
    Mat bottleneck;
    TcnStack::Cache tcn;
    Mat tcn_out;
    Mat activated;
    Mat mask;
  };

  MaskNet() = default;
  MaskNet(int feature_dim, int num_masks, const TcnConfig& tcn, Rng& rng);

  Mat Forward(const Mat& x, Cache* cache) const;
  Mat Backward(const Cache& cache, const Mat& dmask);

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen);
  int num_masks() const { return num_masks_; }

 private:
  Conv1x1 in_proj_;
  TcnStack tcn_;
  PRelu act_;
  Conv1x1 out_proj_;
  int num_masks_ = 1;
};

// Multiplicative conditioning: out[d, t] = z[d, t] * e[d].
Mat Adapt(const Mat& z, const Vec& embedding);

// The conditioned extractor x_hat = f(y, e): encoder, clue-independent stack,
// adaptation layer, mask stack, masking and decoder.
class Extractor {
 public:
  struct Cache {
    std::size_t length = 0;
    Encoder::Cache encoder;
    Mat features;
    MixtureNet::Cache mix;
    Mat mixture_repr;
    Vec embedding;
    MaskNet::Cache tgt;
    Mat masked;
  };

  Extractor() = default;
  Extractor(const CodecConfig& codec, const ExtractorConfig& config, Rng& rng);

  Vec Forward(const Vec& mixture, const Vec& embedding, Cache* cache) const;
  // Accumulates parameter gradients and returns d(loss)/d(embedding).
  Vec Backward(const Cache& cache, const Vec& doutput);

  // Stage-wise access.
  Mat Encode(const Vec& mixture) const;
  Mat ExtMix(const Mat& features) const;
  Mat ExtTgt(const Mat& adapted) const;
  Vec Decode(const Mat& features, std::size_t length) const;

  void CollectParams(ParamList* out);
  void SetFrozen(bool encoder, bool ext_mix, bool ext_tgt, bool decoder);
  void SetAllFrozen(bool frozen) { SetFrozen(frozen, frozen, frozen, frozen); }

  const CodecConfig& codec() const { return codec_; }
  const ExtractorConfig& config() const { return config_; }
  std::uint64_t forward_count() const { return forward_count_.count(); }
  void ResetForwardCount() { forward_count_.Reset(); }

 private:
  CodecConfig codec_;
  ExtractorConfig config_;
  Encoder encoder_;
  MixtureNet ext_mix_;
  MaskNet ext_tgt_;
  Decoder decoder_;
  bool encoder_frozen_ = false;
  bool ext_mix_frozen_ = false;
  CallCounter forward_count_;
};

}  // namespace tsex

#endif  // TSEX_EXTRACTION_H_
