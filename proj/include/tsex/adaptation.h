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

#ifndef TSEX_ADAPTATION_H_
#define TSEX_ADAPTATION_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tsex/clue_encoders.h"
#include "tsex/dataset.h"
#include "tsex/losses.h"
#include "tsex/model.h"

namespace tsex {

// Mean of the per-enrollment embeddings.
Vec AverageEmbedding(const std::vector<Waveform>& enrollments,
                     const EnrollmentEncoder& encoder);

// Appends one column per new class, initialized with its average
// embedding, in the order given. Returns the new class ids.
std::vector<int> AddNewClasses(
    TseModel* model,
    const std::vector<std::pair<std::string, std::vector<Waveform>>>& classes);

struct AdaptConfig {
  int epochs = 50;
  double learning_rate = 1e-3;
  int batch_size = 8;
  int patience = 10;
  std::uint64_t seed = 1;
  LossConfig loss;
};

struct AdaptReport {
  std::vector<int> new_ids;
  double initial_valid_loss = 0.0;
  double best_valid_loss = 0.0;
  int best_epoch = 0;
  std::vector<double> train_losses;
  std::vector<double> valid_losses;
};

// Mean class-clue loss over `examples`.
double AdaptationLoss(const TseModel& model,
                      const std::vector<TrainingExample>& examples,
                      const LossConfig& loss);

// Optimizes only the embedding columns of `new_ids`, which must be the
// trailing columns of the matrix. Everything else keeps its exact bits.
AdaptReport FinetuneNewEmbeddings(TseModel* model,
                                  const std::vector<int>& new_ids,
                                  const std::vector<TrainingExample>& train,
                                  const std::vector<TrainingExample>& valid,
                                  const AdaptConfig& config);

}  // namespace tsex

#endif  // TSEX_ADAPTATION_H_
