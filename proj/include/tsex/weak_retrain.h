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

#ifndef TSEX_WEAK_RETRAIN_H_
#define TSEX_WEAK_RETRAIN_H_

#include <cstdint>
#include <vector>

#include "tsex/classifier.h"
#include "tsex/dataset.h"
#include "tsex/evaluation.h"
#include "tsex/model.h"

namespace tsex {

struct WeakRetrainConfig {
  int iterations = 10000;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double clip_norm = 5.0;
  // Weak validation loss is measured every this many iterations; the best
  // state seen (including the starting one) is kept.
  int eval_every = 50;
  std::uint64_t seed = 1;
};

struct WeakRetrainReport {
  double initial_valid_loss = 0.0;
  double best_valid_loss = 0.0;
  int best_iteration = 0;
  std::vector<std::pair<int, double>> valid_history;
};

// Mean classifier BCE of the class-clue extractions over the examples'
// target label sets. Only mixtures and labels are used.
double WeakLoss(const TseModel& model, const Classifier& classifier,
                const std::vector<TrainingExample>& examples);

// Classifier posteriors of each extraction scored against its target
// labels.
// Tagging data for the classifier: every stem under its own class, and
// every mixture under all of its active classes.
std::vector<LabeledAudio> TaggingSet(const std::vector<TrainingExample>& examples);

MapResult WeakMap(const TseModel& model, const Classifier& classifier,
                  const std::vector<TrainingExample>& examples);

// Updates the clue-independent stack only, by minimizing the weak loss
// through the frozen classifier.
WeakRetrainReport RetrainWeak(TseModel* model, const Classifier& classifier,
                              const std::vector<TrainingExample>& train,
                              const std::vector<TrainingExample>& valid,
                              const WeakRetrainConfig& config);

}  // namespace tsex

#endif  // TSEX_WEAK_RETRAIN_H_
