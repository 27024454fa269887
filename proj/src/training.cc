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

#include "tsex/training.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "tsex/adam.h"
#include "tsex/errors.h"

namespace tsex {
namespace {

std::vector<TrainingExample> Filter(const std::vector<TrainingExample>& in,
                                    bool drop_inactive) {
  if (!drop_inactive) return in;
  std::vector<TrainingExample> out;
  for (const auto& item : in) {
    if (!item.example.target.inactive) out.push_back(item);
  }
  return out;
}

// Loss for one example; gradients are accumulated with `weight` when it is
// nonzero.
double ExampleLoss(TseModel& model, const TrainingExample& item,
                   const TrainConfig& config, double weight) {
  const MixtureExample& ex = item.example;
  const Vec& mixture = ex.mixture.samples();
  const Vec target = ex.TargetReference(ex.target.labels).samples();
  switch (config.clue_mode) {
    case TrainClueMode::kClass:
      return ClueLoss(model, mixture, item.TargetLabels(), target, config.loss,
                      weight);
    case TrainClueMode::kEnroll:
      Require(!item.enrollments.empty(), ErrorCategory::kConfig,
              item.id + ": enrollment training needs enrollments");
      return ClueLoss(model, mixture, item.TargetEnrollments(), target,
                      config.loss, weight);
    case TrainClueMode::kMixed:
      return MixedClueLoss(model, mixture, target, item.TargetLabels(),
                           item.TargetEnrollments(), config.loss, weight)
          .total;
  }
  return 0.0;
}

std::vector<Mat> Snapshot(const ParamList& params) {
  std::vector<Mat> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.param->value);
  return out;
}

void Restore(const ParamList& params, const std::vector<Mat>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].param->value = values[i];
    params[i].param->ZeroGrad();
  }
}

}  // namespace

TrainClueMode ParseTrainClueMode(const std::string& text) {
  if (text == "class") return TrainClueMode::kClass;
  if (text == "enroll") return TrainClueMode::kEnroll;
  if (text == "mixed") return TrainClueMode::kMixed;
  Fail(ErrorCategory::kConfig, "unknown clue_mode '" + text + "'");
}

std::string TrainClueModeName(TrainClueMode mode) {
  switch (mode) {
    case TrainClueMode::kClass: return "class";
    case TrainClueMode::kEnroll: return "enroll";
    case TrainClueMode::kMixed: return "mixed";
  }
  return "";
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"clue_mode", TrainClueModeName(clue_mode)},
          {"max_epochs", max_epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"clip_norm", clip_norm},
          {"patience", patience},
          {"drop_inactive", drop_inactive},
          {"seed", seed},
          {"sdr_ceiling_db", loss.sdr_ceiling_db},
          {"inactive_floor", loss.inactive_floor},
          {"class_weight", loss.class_weight}};
}

double ValidationLoss(TseModel& model,
                      const std::vector<TrainingExample>& examples,
                      const TrainConfig& config) {
  Require(!examples.empty(), ErrorCategory::kPrecondition,
          "empty validation set");
  double sum = 0.0;
  for (const auto& item : examples) sum += ExampleLoss(model, item, config, 0.0);
  return sum / static_cast<double>(examples.size());
}

TrainReport TrainModel(TseModel* model,
                       const std::vector<TrainingExample>& train_in,
                       const std::vector<TrainingExample>& valid_in,
                       const TrainConfig& config) {
  config.loss.Validate();
  Require(config.batch_size >= 1 && config.max_epochs >= 0,
          ErrorCategory::kConfig, "batch_size and max_epochs must be positive");
  const auto train = Filter(train_in, config.drop_inactive);
  const auto valid = Filter(valid_in, config.drop_inactive);
  Require(!train.empty() && !valid.empty(), ErrorCategory::kPrecondition,
          "training needs non-empty train and validation sets");

  model->SetAllFrozen(false);
  const ParamList params = model->Params();
  Adam adam(SlotsFor(params), AdamConfig{config.learning_rate});
  const int first_epoch = model->metadata.value("epoch", 0) + 1;
  Rng rng = Rng(config.seed).Fork(static_cast<std::uint64_t>(first_epoch));

  TrainReport report;
  report.train_examples = train.size();
  report.initial_valid_loss = ValidationLoss(*model, valid, config);
  report.best_valid_loss =
      model->metadata.value("best_valid_loss", report.initial_valid_loss);
  report.best_epoch = model->metadata.value("best_epoch", first_epoch - 1);
  std::vector<Mat> best = Snapshot(params);
  int since_best = 0;

  auto abort_on = [&](double value, const std::string& where) {
    if (std::isfinite(value)) return;
    Restore(params, best);
    if (!config.checkpoint_path.empty()) model->Save(config.checkpoint_path);
    Fail(ErrorCategory::kDivergence,
         "non-finite loss " + where + "; restored the last good parameters");
  };

  std::ofstream log;
  if (!config.log_path.empty()) {
    if (config.log_path.has_parent_path()) {
      std::filesystem::create_directories(config.log_path.parent_path());
    }
    log.open(config.log_path, std::ios::app);
  }

  const std::uint64_t passes_before = model->extractor().forward_count();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = first_epoch; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.Shuffle(order);
    double train_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double weight = 1.0 / static_cast<double>(end - start);
      ZeroGrads(params);
      for (std::size_t i = start; i < end; ++i) {
        const double loss = ExampleLoss(*model, train[order[i]], config, weight);
        abort_on(loss, "in epoch " + std::to_string(epoch));
        train_sum += loss;
      }
      if (config.clip_norm > 0.0) adam.ClipGradNorm(config.clip_norm);
      adam.Step();
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = train_sum / static_cast<double>(train.size());
    entry.valid_loss = ValidationLoss(*model, valid, config);
    abort_on(entry.valid_loss, "on validation in epoch " + std::to_string(epoch));
    entry.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    report.epochs.push_back(entry);
    spdlog::info("epoch {} train {:.3f} valid {:.3f} ({:.1f}s)", epoch,
                 entry.train_loss, entry.valid_loss, entry.seconds);
    if (log.is_open()) {
      log << nlohmann::json{{"epoch", epoch},
                            {"train_loss", entry.train_loss},
                            {"valid_loss", entry.valid_loss},
                            {"seconds", entry.seconds}}
                 .dump()
          << '\n';
      log.flush();
    }

    model->metadata["epoch"] = epoch;
    if (entry.valid_loss < report.best_valid_loss) {
      report.best_valid_loss = entry.valid_loss;
      report.best_epoch = epoch;
      best = Snapshot(params);
      since_best = 0;
      model->metadata["best_epoch"] = epoch;
      model->metadata["best_valid_loss"] = entry.valid_loss;
      model->metadata["train_config"] = config.ToJson();
      if (!config.checkpoint_path.empty()) model->Save(config.checkpoint_path);
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      spdlog::info("no improvement for {} epochs; stopping", since_best);
      break;
    }
  }
  report.forward_passes = model->extractor().forward_count() - passes_before;
  Restore(params, best);
  model->metadata["best_epoch"] = report.best_epoch;
  model->metadata["best_valid_loss"] = report.best_valid_loss;
  return report;
}

}  // namespace tsex
