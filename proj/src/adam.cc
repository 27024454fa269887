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

#include "tsex/adam.h"

#include <cmath>

#include "tsex/errors.h"

namespace tsex {
namespace {

Eigen::Index ColumnCount(const TrainableSlot& slot) {
  return slot.num_cols < 0 ? slot.param->value.cols() - slot.first_col
                           : slot.num_cols;
}

}  // namespace

std::vector<TrainableSlot> SlotsFor(const ParamList& params) {
  std::vector<TrainableSlot> slots;
  for (const auto& p : params) slots.push_back({p.name, p.param, 0, -1});
  return slots;
}

Adam::Adam(std::vector<TrainableSlot> slots, const AdamConfig& config)
    : slots_(std::move(slots)), config_(config) {
  for (const auto& slot : slots_) {
    Require(slot.param != nullptr, ErrorCategory::kPrecondition,
            "null parameter in optimizer slot " + slot.name);
    const Eigen::Index cols = ColumnCount(slot);
    Require(slot.first_col >= 0 && cols >= 0 &&
                slot.first_col + cols <= slot.param->value.cols(),
            ErrorCategory::kShape, "slot columns out of range: " + slot.name);
    first_moment_.push_back(Mat::Zero(slot.param->value.rows(), cols));
    second_moment_.push_back(Mat::Zero(slot.param->value.rows(), cols));
  }
}

void Adam::Step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const TrainableSlot& slot = slots_[i];
    const Eigen::Index cols = ColumnCount(slot);
    const auto grad = slot.param->grad.middleCols(slot.first_col, cols);
    Mat& m = first_moment_[i];
    Mat& v = second_moment_[i];
    m = config_.beta1 * m + (1.0 - config_.beta1) * grad;
    v = config_.beta2 * v + (1.0 - config_.beta2) * grad.cwiseAbs2();
    auto value = slot.param->value.middleCols(slot.first_col, cols);
    value.array() -= config_.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + config_.epsilon);
  }
}

double Adam::GradNorm() const {
  double total = 0.0;
  for (const auto& slot : slots_) {
    total += slot.param->grad.middleCols(slot.first_col, ColumnCount(slot))
                 .squaredNorm();
  }
  return std::sqrt(total);
}

double Adam::ClipGradNorm(double max_norm) {
  const double norm = GradNorm();
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& slot : slots_) {
      slot.param->grad.middleCols(slot.first_col, ColumnCount(slot)) *= scale;
    }
  }
  return norm;
}

}  // namespace tsex
