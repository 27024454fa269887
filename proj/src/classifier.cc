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

#include "tsex/classifier.h"

#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "tsex/adam.h"
#include "tsex/checkpoint.h"
#include "tsex/codec.h"
#include "tsex/errors.h"
#include "tsex/losses.h"

namespace tsex {
namespace {

constexpr double kPowerFloor = 1e-6;

Vec NHot(const LabelSet& labels, int num_classes) {
  Vec t = Vec::Zero(num_classes);
  for (int id : labels.ids) {
    Require(id >= 0 && id < num_classes, ErrorCategory::kVocabulary,
            "label " + std::to_string(id) + " outside classifier vocabulary");
    t[id] = 1.0;
  }
  return t;
}

}  // namespace

nlohmann::json ClassifierConfig::ToJson() const {
  return {{"window", window},
          {"hop", hop},
          {"channels", channels},
          {"kernel_size", kernel_size}};
}

ClassifierConfig ClassifierConfig::FromJson(const nlohmann::json& json) {
  ClassifierConfig c;
  c.window = json.value("window", c.window);
  c.hop = json.value("hop", c.hop);
  c.channels = json.value("channels", c.channels);
  c.kernel_size = json.value("kernel_size", c.kernel_size);
  return c;
}

// ------------------------------------------------------- SpectralFrontEnd

SpectralFrontEnd::SpectralFrontEnd(const ClassifierConfig& config)
    : window_(config.window), hop_(config.hop) {
  const int bins = config.bins();
  cos_basis_.resize(bins, window_);
  sin_basis_.resize(bins, window_);
  for (int n = 0; n < window_; ++n) {
    // Periodic Hann window.
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / window_);
    for (int k = 0; k < bins; ++k) {
      const double phase = 2.0 * std::numbers::pi * k * n / window_;
      cos_basis_(k, n) = w * std::cos(phase);
      sin_basis_(k, n) = -w * std::sin(phase);
    }
  }
}

Mat SpectralFrontEnd::Forward(const Vec& audio, Cache* cache) const {
  const std::size_t length = static_cast<std::size_t>(audio.size());
  Require(length >= static_cast<std::size_t>(window_), ErrorCategory::kLength,
          "classifier input of " + std::to_string(length) +
              " samples is shorter than one analysis window");
  const int frames = NumFrames(length, window_, hop_);
  Mat framed(window_, frames);
  for (int t = 0; t < frames; ++t) {
    const Eigen::Index start = static_cast<Eigen::Index>(t) * hop_;
    const Eigen::Index avail =
        std::min<Eigen::Index>(window_, audio.size() - start);
    framed.col(t).head(avail) = audio.segment(start, avail);
    framed.col(t).tail(window_ - avail).setZero();
  }
  Mat re = cos_basis_ * framed;
  Mat im = sin_basis_ * framed;
  Mat power = re.array().square() + im.array().square();
  Mat features =
      0.5 * (power.array() + kPowerFloor).log() / std::log(10.0);
  if (cache != nullptr) {
    cache->length = length;
    cache->frames = std::move(framed);
    cache->real = std::move(re);
    cache->imag = std::move(im);
    cache->power = std::move(power);
  }
  return features;
}

Vec SpectralFrontEnd::Backward(const Cache& cache, const Mat& dfeatures) const {
  const Mat dpower = (0.5 / std::log(10.0)) * dfeatures.array() /
                     (cache.power.array() + kPowerFloor);
  const Mat dre = 2.0 * cache.real.array() * dpower.array();
  const Mat dim = 2.0 * cache.imag.array() * dpower.array();
  const Mat dframes =
      cos_basis_.transpose() * dre + sin_basis_.transpose() * dim;
  Vec daudio = Vec::Zero(static_cast<Eigen::Index>(cache.length));
  for (Eigen::Index t = 0; t < dframes.cols(); ++t) {
    const Eigen::Index start = t * hop_;
    const Eigen::Index avail =
        std::min<Eigen::Index>(window_, daudio.size() - start);
    daudio.segment(start, avail) += dframes.col(t).head(avail);
  }
  return daudio;
}

// ------------------------------------------------------------- Classifier

Classifier::Classifier(const ClassifierConfig& config, Vocabulary vocabulary,
                       std::uint64_t seed)
    : config_(config), vocabulary_(std::move(vocabulary)), front_(config) {
  Require(vocabulary_.size() > 0, ErrorCategory::kConfig,
          "classifier needs at least one class");
  Rng rng(seed);
  conv1_ = Conv1d(config.bins(), config.channels, config.kernel_size, rng);
  conv2_ = Conv1d(config.channels, config.channels, config.kernel_size, rng);
  head_ = Conv1x1(config.channels, vocabulary_.size(), true, rng);
}

Vec Classifier::Forward(const Vec& audio, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.features = front_.Forward(audio, &c.front);
  c.pre1 = conv1_.Forward(c.features);
  c.act1 = Relu(c.pre1);
  c.pre2 = conv2_.Forward(c.act1);
  c.act2 = Relu(c.pre2);
  c.frame_posteriors = Sigmoid(head_.Forward(c.act2));
  return c.frame_posteriors.rowwise().mean();
}

Vec Classifier::Classify(const Waveform& audio) const {
  return Forward(audio.samples(), nullptr);
}

Mat Classifier::FrameGradient(const Cache& cache, const Vec& dposterior) const {
  const Eigen::Index frames = cache.frame_posteriors.cols();
  const Mat dframe =
      (dposterior / static_cast<double>(frames)).replicate(1, frames);
  return SigmoidBackward(cache.frame_posteriors, dframe);
}

Vec Classifier::Backward(const Cache& cache, const Vec& dposterior) {
  const Mat dlogits = FrameGradient(cache, dposterior);
  Mat d = head_.Backward(cache.act2, dlogits);
  d = conv2_.Backward(cache.act1, ReluBackward(cache.pre2, d));
  d = conv1_.Backward(cache.features, ReluBackward(cache.pre1, d));
  return front_.Backward(cache.front, d);
}

Vec Classifier::InputGradient(const Cache& cache, const Vec& dposterior) const {
  const Mat dlogits = FrameGradient(cache, dposterior);
  Mat d = head_.InputGradient(dlogits);
  d = conv2_.InputGradient(ReluBackward(cache.pre2, d));
  d = conv1_.InputGradient(ReluBackward(cache.pre1, d));
  return front_.Backward(cache.front, d);
}

ParamList Classifier::Params() {
  ParamList out;
  conv1_.CollectParams("classifier.conv1", &out);
  conv2_.CollectParams("classifier.conv2", &out);
  head_.CollectParams("classifier.head", &out);
  return out;
}

void Classifier::set_frozen(bool frozen) {
  conv1_.set_frozen(frozen);
  conv2_.set_frozen(frozen);
  head_.set_frozen(frozen);
}

void Classifier::Save(const std::filesystem::path& path) const {
  Checkpoint ckpt;
  ckpt.header["kind"] = "classifier";
  ckpt.header["config"] = config_.ToJson();
  ckpt.header["vocabulary"] = vocabulary_.names();
  ckpt.header["metadata"] = metadata;
  StoreParams(const_cast<Classifier*>(this)->Params(), &ckpt);
  ckpt.Save(path);
}

Classifier Classifier::Load(const std::filesystem::path& path) {
  const Checkpoint ckpt = Checkpoint::Load(path);
  Require(ckpt.header.value("kind", "") == "classifier", ErrorCategory::kParse,
          path.string() + " does not hold a classifier");
  Classifier c(ClassifierConfig::FromJson(ckpt.header.at("config")),
               Vocabulary(ckpt.header.at("vocabulary")
                              .get<std::vector<std::string>>()),
               0);
  RestoreParams(ckpt, c.Params());
  c.metadata = ckpt.header.value("metadata", nlohmann::json::object());
  return c;
}

// --------------------------------------------------------------- training

double ClassifierLoss(const Classifier& classifier,
                      const std::vector<LabeledAudio>& data) {
  Require(!data.empty(), ErrorCategory::kPrecondition, "empty classifier set");
  double sum = 0.0;
  for (const auto& item : data) {
    const Vec p = classifier.Forward(item.audio.samples(), nullptr);
    sum += BinaryCrossEntropy(p, NHot(item.labels, classifier.num_classes()))
               .value;
  }
  return sum / static_cast<double>(data.size());
}

ClassifierTrainReport TrainClassifier(Classifier* classifier,
                                      const std::vector<LabeledAudio>& train,
                                      const std::vector<LabeledAudio>& valid,
                                      const ClassifierTrainConfig& config) {
  Require(!train.empty() && !valid.empty(), ErrorCategory::kPrecondition,
          "classifier training needs train and validation data");
  classifier->set_frozen(false);
  ParamList params = classifier->Params();
  Adam adam(SlotsFor(params), AdamConfig{config.learning_rate});
  Rng rng(config.seed);

  ClassifierTrainReport report;
  report.initial_valid_loss = ClassifierLoss(*classifier, valid);
  report.best_valid_loss = report.initial_valid_loss;
  std::vector<Mat> best;
  for (const auto& p : params) best.push_back(p.param->value);

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      ZeroGrads(params);
      for (std::size_t i = start; i < end; ++i) {
        const auto& item = train[order[i]];
        Classifier::Cache cache;
        const Vec p = classifier->Forward(item.audio.samples(), &cache);
        const LossValue bce =
            BinaryCrossEntropy(p, NHot(item.labels, classifier->num_classes()));
        Require(std::isfinite(bce.value), ErrorCategory::kDivergence,
                "classifier loss became non-finite");
        classifier->Backward(cache, bce.grad / static_cast<double>(end - start));
      }
      adam.ClipGradNorm(5.0);
      adam.Step();
    }
    const double v = ClassifierLoss(*classifier, valid);
    report.valid_losses.push_back(v);
    spdlog::debug("classifier epoch {} valid {:.4f}", epoch, v);
    if (v < report.best_valid_loss) {
      report.best_valid_loss = v;
      report.best_epoch = epoch;
      for (std::size_t k = 0; k < params.size(); ++k) {
        best[k] = params[k].param->value;
      }
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k].param->value = best[k];
    params[k].param->ZeroGrad();
  }
  return report;
}

int SelectOutput(const std::vector<Waveform>& candidates, int target_class,
                 const Classifier& classifier) {
  Require(!candidates.empty(), ErrorCategory::kPrecondition,
          "no candidates to select from");
  Require(target_class >= 0 && target_class < classifier.num_classes(),
          ErrorCategory::kVocabulary, "target class outside vocabulary");
  int best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double score = classifier.Classify(candidates[i])[target_class];
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace tsex
