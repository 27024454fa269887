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

#include "tsex/uss_baseline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "tsex/adam.h"
#include "tsex/checkpoint.h"
#include "tsex/errors.h"
#include "tsex/evaluation.h"

namespace tsex {

void SeparatorConfig::Validate() const {
  extractor.Validate();
  Require(num_outputs >= 2, ErrorCategory::kConfig,
          "separator needs at least two outputs");
  Require(codec.feature_dim == extractor.feature_dim, ErrorCategory::kConfig,
          "codec and extractor feature_dim differ");
}

nlohmann::json SeparatorConfig::ToJson() const {
  return {{"feature_dim", codec.feature_dim},
          {"frame_length", codec.frame_length},
          {"hop", codec.hop},
          {"bottleneck", extractor.bottleneck},
          {"hidden", extractor.hidden},
          {"kernel_size", extractor.kernel_size},
          {"blocks", extractor.blocks},
          {"mix_repeats", extractor.mix_repeats},
          {"tgt_repeats", extractor.tgt_repeats},
          {"num_outputs", num_outputs}};
}

SeparatorConfig SeparatorConfig::FromJson(const nlohmann::json& json) {
  SeparatorConfig c;
  try {
    c.codec.feature_dim = json.at("feature_dim");
    c.codec.frame_length = json.at("frame_length");
    c.codec.hop = json.at("hop");
    c.extractor.feature_dim = c.codec.feature_dim;
    c.extractor.bottleneck = json.at("bottleneck");
    c.extractor.hidden = json.at("hidden");
    c.extractor.kernel_size = json.at("kernel_size");
    c.extractor.blocks = json.at("blocks");
    c.extractor.mix_repeats = json.at("mix_repeats");
    c.extractor.tgt_repeats = json.at("tgt_repeats");
    c.num_outputs = json.at("num_outputs");
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCategory::kParse, std::string("separator config: ") + e.what());
  }
  c.Validate();
  return c;
}

Separator::Separator(const SeparatorConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.Validate();
  Rng rng(seed);
  const ExtractorConfig& e = config_.extractor;
  TcnConfig tcn{e.bottleneck, e.hidden, e.kernel_size, e.blocks, e.mix_repeats};
  encoder_ = Encoder(config_.codec, rng);
  mix_ = MixtureNet(e.feature_dim, tcn, rng);
  tcn.repeats = e.tgt_repeats;
  masks_ = MaskNet(e.feature_dim, config_.num_outputs, tcn, rng);
  decoder_ = Decoder(config_.codec, rng);
}

std::vector<Vec> Separator::Forward(const Vec& mixture, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.length = static_cast<std::size_t>(mixture.size());
  c.features = encoder_.Forward(mixture, &c.encoder);
  const Mat repr = mix_.Forward(c.features, cache ? &c.mix : nullptr);
  const Mat mask = masks_.Forward(repr, &c.masks);
  const Eigen::Index d = config_.codec.feature_dim;
  std::vector<Vec> out;
  c.masked.clear();
  for (int k = 0; k < config_.num_outputs; ++k) {
    c.masked.push_back(ApplyMask(c.features, mask.middleRows(k * d, d)));
    out.push_back(decoder_.Forward(c.masked.back(), c.length));
  }
  return out;
}

void Separator::Backward(const Cache& cache, const std::vector<Vec>& doutputs) {
  Require(static_cast<int>(doutputs.size()) == config_.num_outputs,
          ErrorCategory::kShape, "one gradient per separator output expected");
  const Eigen::Index d = config_.codec.feature_dim;
  Mat dfeatures = Mat::Zero(cache.features.rows(), cache.features.cols());
  Mat dmask(cache.masks.mask.rows(), cache.masks.mask.cols());
  for (int k = 0; k < config_.num_outputs; ++k) {
    const Mat dmasked = decoder_.Backward(cache.masked[k], doutputs[k]);
    dfeatures += dmasked.cwiseProduct(cache.masks.mask.middleRows(k * d, d));
    dmask.middleRows(k * d, d) = dmasked.cwiseProduct(cache.features);
  }
  const Mat drepr = masks_.Backward(cache.masks, dmask);
  dfeatures += mix_.Backward(cache.mix, drepr);
  encoder_.Backward(cache.encoder, dfeatures, cache.length);
}

std::vector<Waveform> Separator::Separate(const Waveform& mixture) const {
  std::vector<Waveform> out;
  for (Vec& v : Forward(mixture.samples(), nullptr)) {
    out.emplace_back(std::move(v), mixture.sample_rate());
  }
  return out;
}

ParamList Separator::Params() {
  ParamList out;
  encoder_.CollectParams("encoder", &out);
  mix_.CollectParams("separator.mix", &out);
  masks_.CollectParams("separator.masks", &out);
  decoder_.CollectParams("decoder", &out);
  return out;
}

void Separator::Save(const std::filesystem::path& path) const {
  Checkpoint ckpt;
  ckpt.header["kind"] = "separator";
  ckpt.header["config"] = config_.ToJson();
  StoreParams(const_cast<Separator*>(this)->Params(), &ckpt);
  ckpt.Save(path);
}

Separator Separator::Load(const std::filesystem::path& path) {
  const Checkpoint ckpt = Checkpoint::Load(path);
  Require(ckpt.header.value("kind", "") == "separator", ErrorCategory::kParse,
          path.string() + " does not hold a separator");
  Separator s(SeparatorConfig::FromJson(ckpt.header.at("config")), 0);
  RestoreParams(ckpt, s.Params());
  return s;
}

std::vector<Vec> PitReferences(const MixtureExample& example) {
  std::vector<Vec> refs;
  for (const auto& [id, stem] : example.stems) refs.push_back(stem.samples());
  return refs;
}

namespace {

// Straight enumeration over index permutations, kept apart from PitLoss's
// pair table so the two can be compared.
double ExhaustivePitValue(const std::vector<Vec>& est,
                          const std::vector<Vec>& ref, double tau) {
  std::vector<int> p(est.size());
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double e = (ref[p[i]] - est[i]).squaredNorm();
      const double r = ref[p[i]].squaredNorm();
      sum += 10.0 * std::log10((e + tau * r) / r);
    }
    best = std::min(best, sum / static_cast<double>(p.size()));
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace

double SeparatorLoss(const Separator& separator,
                     const std::vector<TrainingExample>& data, double tau) {
  Require(!data.empty(), ErrorCategory::kPrecondition, "empty separator set");
  double sum = 0.0;
  for (const auto& item : data) {
    const auto est = separator.Forward(item.example.mixture.samples(), nullptr);
    sum += PitLoss(est, PitReferences(item.example), tau).value;
  }
  return sum / static_cast<double>(data.size());
}

SeparatorTrainReport TrainSeparator(Separator* separator,
                                    const std::vector<TrainingExample>& train,
                                    const std::vector<TrainingExample>& valid,
                                    const SeparatorTrainConfig& config) {
  Require(!train.empty() && !valid.empty(), ErrorCategory::kPrecondition,
          "separator training needs train and validation data");
  const double tau = std::pow(10.0, -config.sdr_ceiling_db / 10.0);
  for (const auto& item : train) {
    Require(static_cast<int>(item.example.stems.size()) ==
                separator->config().num_outputs,
            ErrorCategory::kPrecondition,
            "PIT training needs exactly one stem per separator output");
  }
  ParamList params = separator->Params();
  Adam adam(SlotsFor(params), AdamConfig{config.learning_rate});
  Rng rng(config.seed);
  SeparatorTrainReport report;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double scale = 1.0 / static_cast<double>(end - start);
      ZeroGrads(params);
      for (std::size_t i = start; i < end; ++i) {
        const MixtureExample& ex = train[order[i]].example;
        Separator::Cache cache;
        const auto est = separator->Forward(ex.mixture.samples(), &cache);
        const auto refs = PitReferences(ex);
        PitResult pit = PitLoss(est, refs, tau);
        Require(std::isfinite(pit.value), ErrorCategory::kDivergence,
                "separator loss became non-finite");
        if (config.audit_every > 0 && adam.steps() % config.audit_every == 0 &&
            i == start) {
          ++report.audits;
          report.max_audit_error =
              std::max(report.max_audit_error,
                       std::abs(pit.value - ExhaustivePitValue(est, refs, tau)));
        }
        epoch_sum += pit.value;
        for (Vec& g : pit.grads) g *= scale;
        separator->Backward(cache, pit.grads);
      }
      adam.ClipGradNorm(5.0);
      adam.Step();
    }
    report.train_losses.push_back(epoch_sum / static_cast<double>(train.size()));
    report.valid_losses.push_back(SeparatorLoss(*separator, valid, tau));
    spdlog::info("separator epoch {} train {:.3f} valid {:.3f}", epoch,
                 report.train_losses.back(), report.valid_losses.back());
  }
  return report;
}

int OracleSelect(const std::vector<Waveform>& separated,
                 const Waveform& target_stem) {
  Require(!separated.empty(), ErrorCategory::kPrecondition,
          "no separated outputs");
  Require(!target_stem.IsSilent(), ErrorCategory::kPrecondition,
          "oracle selection needs a nonzero target stem");
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < separated.size(); ++i) {
    const double score = SiSdr(separated[i], target_stem);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace tsex
