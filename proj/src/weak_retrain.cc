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

#include "tsex/weak_retrain.h"

#include <cmath>

#include <spdlog/spdlog.h>

#include "tsex/adam.h"
#include "tsex/errors.h"
#include "tsex/losses.h"

namespace tsex {

double WeakLoss(const TseModel& model, const Classifier& classifier,
                const std::vector<TrainingExample>& examples) {
  Require(!examples.empty(), ErrorCategory::kPrecondition, "empty weak set");
  double sum = 0.0;
  for (const auto& item : examples) {
    const Vec est = model.Forward(item.example.mixture.samples(),
                                  item.TargetLabels(), nullptr);
    sum += SecWeakLoss(est, item.TargetLabels(), classifier).value;
  }
  return sum / static_cast<double>(examples.size());
}

std::vector<LabeledAudio> TaggingSet(
    const std::vector<TrainingExample>& examples) {
  std::vector<LabeledAudio> out;
  for (const auto& item : examples) {
    const MixtureExample& ex = item.example;
    for (const auto& [id, stem] : ex.stems) out.push_back({stem, LabelSet::Of({id})});
    out.push_back({ex.mixture, LabelSet::Of({ex.active_classes.begin(),
                                             ex.active_classes.end()})});
  }
  return out;
}

MapResult WeakMap(const TseModel& model, const Classifier& classifier,
                  const std::vector<TrainingExample>& examples) {
  std::vector<Vec> posteriors;
  std::vector<LabelSet> references;
  for (const auto& item : examples) {
    const Waveform est = model.Extract(item.example.mixture, item.TargetLabels());
    posteriors.push_back(classifier.Classify(est));
    references.push_back(item.TargetLabels());
  }
  return MeanAveragePrecision(posteriors, references);
}

WeakRetrainReport RetrainWeak(TseModel* model, const Classifier& classifier,
                              const std::vector<TrainingExample>& train,
                              const std::vector<TrainingExample>& valid,
                              const WeakRetrainConfig& config) {
  Require(!train.empty() && !valid.empty(), ErrorCategory::kPrecondition,
          "weak retraining needs train and validation mixtures");
  Require(config.batch_size >= 1 && config.eval_every >= 1,
          ErrorCategory::kConfig, "batch_size and eval_every must be positive");
  model->SetAllFrozen(true);
  model->extractor().SetFrozen(true, false, true, true);
  const ParamList trainable = FilterByPrefix(model->Params(), "ext_mix.");
  Adam adam(SlotsFor(trainable), AdamConfig{config.learning_rate});
  Rng rng(config.seed);

  WeakRetrainReport report;
  report.initial_valid_loss = WeakLoss(*model, classifier, valid);
  report.best_valid_loss = report.initial_valid_loss;
  report.valid_history.emplace_back(0, report.initial_valid_loss);
  std::vector<Mat> best;
  for (const auto& p : trainable) best.push_back(p.param->value);

  for (int it = 1; it <= config.iterations; ++it) {
    ZeroGrads(trainable);
    for (int b = 0; b < config.batch_size; ++b) {
      const TrainingExample& item =
          train[rng.UniformInt(0, static_cast<int>(train.size()) - 1)];
      TseModel::Pass pass;
      const Vec est =
          model->Forward(item.example.mixture.samples(), item.TargetLabels(), &pass);
      const LossValue loss = SecWeakLoss(est, item.TargetLabels(), classifier);
      Require(std::isfinite(loss.value), ErrorCategory::kDivergence,
              "weak loss became non-finite at iteration " + std::to_string(it));
      model->extractor().Backward(pass.extractor,
                                  loss.grad / static_cast<double>(config.batch_size));
    }
    if (config.clip_norm > 0.0) adam.ClipGradNorm(config.clip_norm);
    adam.Step();
    if (it % config.eval_every == 0 || it == config.iterations) {
      const double v = WeakLoss(*model, classifier, valid);
      report.valid_history.emplace_back(it, v);
      spdlog::info("weak iteration {} valid {:.4f}", it, v);
      if (v < report.best_valid_loss) {
        report.best_valid_loss = v;
        report.best_iteration = it;
        for (std::size_t k = 0; k < trainable.size(); ++k) {
          best[k] = trainable[k].param->value;
        }
      }
    }
  }
  for (std::size_t k = 0; k < trainable.size(); ++k) {
    trainable[k].param->value = best[k];
  }
  ZeroGrads(model->Params());
  model->SetAllFrozen(false);
  return report;
}

}  // namespace tsex
