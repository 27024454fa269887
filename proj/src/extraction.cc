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

#include "tsex/extraction.h"

#include "tsex/errors.h"

namespace tsex {

ExtractorConfig ExtractorConfig::Full() {
  ExtractorConfig c;
  c.feature_dim = 256;
  c.bottleneck = 256;
  c.hidden = 512;
  c.kernel_size = 3;
  c.blocks = 8;
  c.mix_repeats = 1;
  c.tgt_repeats = 7;
  return c;
}

ExtractorConfig ExtractorConfig::Toy() { return ExtractorConfig(); }

void ExtractorConfig::Validate() const {
  Require(feature_dim > 0 && bottleneck > 0 && hidden > 0 && kernel_size > 0 &&
              blocks > 0 && mix_repeats > 0 && tgt_repeats > 0,
          ErrorCategory::kConfig, "extractor dimensions must be positive");
}

// ------------------------------------------------------------- MixtureNet

MixtureNet::MixtureNet(int feature_dim, const TcnConfig& tcn, Rng& rng)
    : norm_(feature_dim),
      in_proj_(feature_dim, tcn.channels, true, rng),
      tcn_(tcn, rng),
      out_proj_(tcn.channels, feature_dim, true, rng) {}

Mat MixtureNet::Forward(const Mat& x, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.normalized = norm_.Forward(x, &c.norm);
  c.bottleneck = in_proj_.Forward(c.normalized);
  c.tcn_out = tcn_.Forward(c.bottleneck, cache != nullptr ? &c.tcn : nullptr);
  return out_proj_.Forward(c.tcn_out);
}

Mat MixtureNet::Backward(const Cache& cache, const Mat& dy) {
  Mat grad = out_proj_.Backward(cache.tcn_out, dy);
  grad = tcn_.Backward(cache.tcn, grad);
  grad = in_proj_.Backward(cache.normalized, grad);
  return norm_.Backward(cache.norm, grad);
}

void MixtureNet::CollectParams(const std::string& prefix, ParamList* out) {
  norm_.CollectParams(prefix + ".norm", out);
  in_proj_.CollectParams(prefix + ".in_proj", out);
  tcn_.CollectParams(prefix + ".tcn", out);
  out_proj_.CollectParams(prefix + ".out_proj", out);
}

void MixtureNet::set_frozen(bool frozen) {
  norm_.set_frozen(frozen);
  in_proj_.set_frozen(frozen);
  tcn_.set_frozen(frozen);
  out_proj_.set_frozen(frozen);
}

// ---------------------------------------------------------------- MaskNet

MaskNet::MaskNet(int feature_dim, int num_masks, const TcnConfig& tcn,
                 Rng& rng)
    : in_proj_(feature_dim, tcn.channels, true, rng),
      tcn_(tcn, rng),
      out_proj_(tcn.channels, feature_dim * num_masks, true, rng),
      num_masks_(num_masks) {
  Require(num_masks >= 1, ErrorCategory::kConfig, "need at least one mask");
}

Mat MaskNet::Forward(const Mat& x, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.input = x;
  c.bottleneck = in_proj_.Forward(x);
  c.tcn_out = tcn_.Forward(c.bottleneck, cache != nullptr ? &c.tcn : nullptr);
  c.activated = act_.Forward(c.tcn_out);
  c.mask = Sigmoid(out_proj_.Forward(c.activated));
  return c.mask;
}

Mat MaskNet::Backward(const Cache& cache, const Mat& dmask) {
  Mat grad = SigmoidBackward(cache.mask, dmask);
  grad = out_proj_.Backward(cache.activated, grad);
  grad = act_.Backward(cache.tcn_out, grad);
  grad = tcn_.Backward(cache.tcn, grad);
  return in_proj_.Backward(cache.input, grad);
}

void MaskNet::CollectParams(const std::string& prefix, ParamList* out) {
  in_proj_.CollectParams(prefix + ".in_proj", out);
  tcn_.CollectParams(prefix + ".tcn", out);
  act_.CollectParams(prefix + ".act", out);
  out_proj_.CollectParams(prefix + ".out_proj", out);
}

void MaskNet::set_frozen(bool frozen) {
  in_proj_.set_frozen(frozen);
  tcn_.set_frozen(frozen);
  act_.set_frozen(frozen);
  out_proj_.set_frozen(frozen);
}

Mat Adapt(const Mat& z, const Vec& embedding) {
  Require(z.rows() == embedding.size(), ErrorCategory::kShape,
          "embedding dimension " + std::to_string(embedding.size()) +
              " does not match feature dimension " + std::to_string(z.rows()));
  return z.array().colwise() * embedding.array();
}

// -------------------------------------------------------------- Extractor

namespace {

TcnConfig StackConfig(const ExtractorConfig& config, int repeats) {
  TcnConfig tcn;
  tcn.channels = config.bottleneck;
  tcn.hidden = config.hidden;
  tcn.kernel_size = config.kernel_size;
  tcn.blocks = config.blocks;
  tcn.repeats = repeats;
  return tcn;
}

}  // namespace

Extractor::Extractor(const CodecConfig& codec, const ExtractorConfig& config,
                     Rng& rng)
    : codec_(codec), config_(config) {
  config.Validate();
  Require(codec.feature_dim == config.feature_dim, ErrorCategory::kConfig,
          "codec and extractor feature dimensions differ");
  encoder_ = Encoder(codec, rng);
  ext_mix_ = MixtureNet(config.feature_dim,
                        StackConfig(config, config.mix_repeats), rng);
  ext_tgt_ = MaskNet(config.feature_dim, 1,
                     StackConfig(config, config.tgt_repeats), rng);
  decoder_ = Decoder(codec, rng);
}

Vec Extractor::Forward(const Vec& mixture, const Vec& embedding,
                       Cache* cache) const {
  forward_count_.Increment();
  Require(embedding.size() == config_.feature_dim, ErrorCategory::kShape,
          "embedding dimension " + std::to_string(embedding.size()) +
              " != " + std::to_string(config_.feature_dim));
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.length = static_cast<std::size_t>(mixture.size());
  c.features = encoder_.Forward(mixture, &c.encoder);
  c.mixture_repr = ext_mix_.Forward(c.features, cache ? &c.mix : nullptr);
  c.embedding = embedding;
  const Mat mask = ext_tgt_.Forward(Adapt(c.mixture_repr, embedding),
                                    cache ? &c.tgt : nullptr);
  c.masked = ApplyMask(c.features, mask);
  return decoder_.Forward(c.masked, c.length);
}

Vec Extractor::Backward(const Cache& cache, const Vec& doutput) {
  const Mat dmasked = decoder_.Backward(cache.masked, doutput);
  const Mat& mask = cache.tgt.mask;
  Mat dfeatures = dmasked.cwiseProduct(mask);
  const Mat dmask = dmasked.cwiseProduct(cache.features);
  const Mat dadapted = ext_tgt_.Backward(cache.tgt, dmask);
  const Vec dembedding =
      dadapted.cwiseProduct(cache.mixture_repr).rowwise().sum();
  // Nothing upstream of the adaptation layer needs a gradient when both
  // stages are frozen.
  if (encoder_frozen_ && ext_mix_frozen_) return dembedding;
  const Mat dmix = Adapt(dadapted, cache.embedding);
  dfeatures += ext_mix_.Backward(cache.mix, dmix);
  if (!encoder_frozen_) {
    encoder_.Backward(cache.encoder, dfeatures, cache.length);
  }
  return dembedding;
}

Mat Extractor::Encode(const Vec& mixture) const {
  return encoder_.Forward(mixture, nullptr);
}

Mat Extractor::ExtMix(const Mat& features) const {
  return ext_mix_.Forward(features, nullptr);
}

Mat Extractor::ExtTgt(const Mat& adapted) const {
  return ext_tgt_.Forward(adapted, nullptr);
}

Vec Extractor::Decode(const Mat& features, std::size_t length) const {
  return decoder_.Forward(features, length);
}

void Extractor::CollectParams(ParamList* out) {
  encoder_.CollectParams("encoder", out);
  ext_mix_.CollectParams("ext_mix", out);
  ext_tgt_.CollectParams("ext_tgt", out);
  decoder_.CollectParams("decoder", out);
}

void Extractor::SetFrozen(bool encoder, bool ext_mix, bool ext_tgt,
                          bool decoder) {
  encoder_frozen_ = encoder;
  ext_mix_frozen_ = ext_mix;
  encoder_.set_frozen(encoder);
  ext_mix_.set_frozen(ext_mix);
  ext_tgt_.set_frozen(ext_tgt);
  decoder_.set_frozen(decoder);
}

}  // namespace tsex
