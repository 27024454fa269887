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

#ifndef TSEX_TRAINING_H_
#define TSEX_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsex/dataset.h"
#include "tsex/losses.h"
#include "tsex/model.h"

namespace tsex {

enum class TrainClueMode { kClass, kEnroll, kMixed };
TrainClueMode ParseTrainClueMode(const std::string& text);
std::string TrainClueModeName(TrainClueMode mode);

struct TrainConfig {
  TrainClueMode clue_mode = TrainClueMode::kClass;
  int max_epochs = 200;
  int batch_size = 8;
  double learning_rate = 1e-4;
  double clip_norm = 5.0;
  // Stop after this many epochs without a validation improvement; 0 never.
  int patience = 0;
  // Drop inactive-target examples from both splits.
  bool drop_inactive = false;
  std::uint64_t seed = 1;
  LossConfig loss;
  // Best model is written here on every improvement when non-empty.
  std::filesystem::path checkpoint_path;
  // Per-epoch JSON lines when non-empty.
  std::filesystem::path log_path;

  nlohmann::json ToJson() const;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochLog> epochs;
  int best_epoch = 0;
  double best_valid_loss = 0.0;
  double initial_valid_loss = 0.0;
  std::uint64_t forward_passes = 0;
  std::size_t train_examples = 0;
};

// Mean validation loss: combined loss for single-clue modes, the weighted
// two-branch loss for mixed mode.
double ValidationLoss(TseModel& model,
                      const std::vector<TrainingExample>& examples,
                      const TrainConfig& config);

// Trains `model` in place, continuing after metadata["epoch"] when present,
// and leaves it holding the lowest-validation-loss parameters. A non-finite
// loss restores (and saves) the last good parameters and throws.
TrainReport TrainModel(TseModel* model,
                       const std::vector<TrainingExample>& train,
                       const std::vector<TrainingExample>& valid,
                       const TrainConfig& config);

}  // namespace tsex

#endif  // TSEX_TRAINING_H_
