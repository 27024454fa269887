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

#ifndef TSEX_CLASSIFIER_H_
#define TSEX_CLASSIFIER_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "tsex/nn.h"
#include "tsex/types.h"
#include "tsex/vocabulary.h"

namespace tsex {

struct ClassifierConfig {
  int window = 256;  // 32 ms at 8 kHz
  int hop = 128;     // 16 ms
  int channels = 32;
  int kernel_size = 3;

  int bins() const { return window / 2 + 1; }
  nlohmann::json ToJson() const;
  static ClassifierConfig FromJson(const nlohmann::json& json);
};

// Log-magnitude short-time spectra through a Hann-windowed DFT.
class SpectralFrontEnd {
 public:
  struct Cache {
    std::size_t length = 0;
    Mat frames;  // window x T
    Mat real;
    Mat imag;
    Mat power;
  };

  SpectralFrontEnd() = default;
  explicit SpectralFrontEnd(const ClassifierConfig& config);

  // bins x T features.
  Mat Forward(const Vec& audio, Cache* cache) const;
  Vec Backward(const Cache& cache, const Mat& dfeatures) const;

 private:
  int window_ = 0;
  int hop_ = 0;
  Mat cos_basis_;  // bins x window, window folded in
  Mat sin_basis_;
};

// Multi-label tagger: two convolutional layers over the spectra, a
// per-class logistic head and the mean of frame posteriors.
class Classifier {
 public:
  struct Cache {
    SpectralFrontEnd::Cache front;
    Mat features;
    Mat pre1, act1, pre2, act2;
    Mat frame_posteriors;
  };

  Classifier() = default;
  Classifier(const ClassifierConfig& config, Vocabulary vocabulary,
             std::uint64_t seed);

  Vec Forward(const Vec& audio, Cache* cache) const;
  Vec Classify(const Waveform& audio) const;
  // Accumulates parameter gradients (unless frozen) and returns d/d(audio).
  Vec Backward(const Cache& cache, const Vec& dposterior);
  // d/d(audio) without touching any parameter gradient.
  Vec InputGradient(const Cache& cache, const Vec& dposterior) const;

  ParamList Params();
  void set_frozen(bool frozen);

  int num_classes() const { return vocabulary_.size(); }
  std::size_t min_length() const {
    return static_cast<std::size_t>(config_.window);
  }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const ClassifierConfig& config() const { return config_; }

  void Save(const std::filesystem::path& path) const;
  static Classifier Load(const std::filesystem::path& path);

  nlohmann::json metadata = nlohmann::json::object();

 private:
  Mat FrameGradient(const Cache& cache, const Vec& dposterior) const;

  ClassifierConfig config_;
  Vocabulary vocabulary_;
  SpectralFrontEnd front_;
  Conv1d conv1_;
  Conv1d conv2_;
  Conv1x1 head_;
};

struct LabeledAudio {
  Waveform audio;
  LabelSet labels;
};

struct ClassifierTrainConfig {
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

struct ClassifierTrainReport {
  double initial_valid_loss = 0.0;
  double best_valid_loss = 0.0;
  int best_epoch = 0;
  std::vector<double> valid_losses;
};

// Mean multi-label BCE of `classifier` over `data`.
double ClassifierLoss(const Classifier& classifier,
                      const std::vector<LabeledAudio>& data);

// Trains in place and keeps the parameters of the lowest validation loss.
ClassifierTrainReport TrainClassifier(Classifier* classifier,
                                      const std::vector<LabeledAudio>& train,
                                      const std::vector<LabeledAudio>& valid,
                                      const ClassifierTrainConfig& config);

// Index of the candidate with the highest posterior for `target_class`;
// ties go to the lowest index.
int SelectOutput(const std::vector<Waveform>& candidates, int target_class,
                 const Classifier& classifier);

}  // namespace tsex

#endif  // TSEX_CLASSIFIER_H_
