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

#include "tsex/adaptation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "tsex/adam.h"
#include "tsex/errors.h"

namespace tsex {

Vec AverageEmbedding(const std::vector<Waveform>& enrollments,
                     const EnrollmentEncoder& encoder) {
  Require(!enrollments.empty(), ErrorCategory::kPrecondition,
          "average embedding needs at least one enrollment");
  return MultiEnrollEmbedding(enrollments, encoder) /
         static_cast<double>(enrollments.size());
}

std::vector<int> AddNewClasses(
    TseModel* model,
    const std::vector<std::pair<std::string, std::vector<Waveform>>>& classes) {
  std::vector<int> ids;
  for (const auto& [name, enrollments] : classes) {
    Require(!model->vocabulary().Contains(name), ErrorCategory::kVocabulary,
            "class '" + name + "' is already known");
    ids.push_back(model->embeddings().Extend(
        AverageEmbedding(enrollments, model->enrollment()), name));
  }
  return ids;
}

double AdaptationLoss(const TseModel& model,
                      const std::vector<TrainingExample>& examples,
                      const LossConfig& loss) {
  Require(!examples.empty(), ErrorCategory::kPrecondition, "empty adaptation set");
  double sum = 0.0;
  for (const auto& item : examples) {
    const MixtureExample& ex = item.example;
    const Vec est = model.Forward(ex.mixture.samples(), item.TargetLabels(), nullptr);
    sum += CombinedLoss(est, ex.TargetReference(ex.target.labels).samples(),
                        ex.mixture.samples(), loss)
               .value;
  }
  return sum / static_cast<double>(examples.size());
}

AdaptReport FinetuneNewEmbeddings(TseModel* model,
                                  const std::vector<int>& new_ids,
                                  const std::vector<TrainingExample>& train,
                                  const std::vector<TrainingExample>& valid,
                                  const AdaptConfig& config) {
  Require(!new_ids.empty(), ErrorCategory::kPrecondition, "no new classes");
  Require(!train.empty() && !valid.empty(), ErrorCategory::kPrecondition,
          "adaptation needs train and validation mixtures");
  const int first = *std::min_element(new_ids.begin(), new_ids.end());
  const int count = static_cast<int>(new_ids.size());
  Require(first + count == model->embeddings().size(), ErrorCategory::kPrecondition,
          "new classes must be the trailing embedding columns");

  model->SetAllFrozen(true);
  Param& matrix = model->embeddings().param();
  matrix.ZeroGrad();
  Adam adam({TrainableSlot{"class_embedding.matrix", &matrix, first, count}},
            AdamConfig{config.learning_rate});
  Rng rng(config.seed);

  AdaptReport report;
  report.new_ids = new_ids;
  report.initial_valid_loss = AdaptationLoss(*model, valid, config.loss);
  report.best_valid_loss = report.initial_valid_loss;
  Mat best = matrix.value.middleCols(first, count);
  int since_best = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.Shuffle(order);
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      matrix.ZeroGrad();
      for (std::size_t i = start; i < end; ++i) {
        const TrainingExample& item = train[order[i]];
        const MixtureExample& ex = item.example;
        const double loss = ClueLoss(
            *model, ex.mixture.samples(), item.TargetLabels(),
            ex.TargetReference(ex.target.labels).samples(), config.loss,
            1.0 / static_cast<double>(end - start));
        if (!std::isfinite(loss)) {
          matrix.value.middleCols(first, count) = best;
          Fail(ErrorCategory::kDivergence,
               "adaptation loss became non-finite in epoch " +
                   std::to_string(epoch));
        }
        sum += loss;
      }
      adam.Step();
    }
    report.train_losses.push_back(sum / static_cast<double>(train.size()));
    const double v = AdaptationLoss(*model, valid, config.loss);
    report.valid_losses.push_back(v);
    spdlog::info("adapt epoch {} train {:.3f} valid {:.3f}", epoch,
                 report.train_losses.back(), v);
    if (v < report.best_valid_loss) {
      report.best_valid_loss = v;
      report.best_epoch = epoch;
      best = matrix.value.middleCols(first, count);
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  matrix.value.middleCols(first, count) = best;
  matrix.ZeroGrad();
  model->SetAllFrozen(false);
  return report;
}

}  // namespace tsex
