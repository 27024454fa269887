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

#ifndef TSEX_ADAM_H_
#define TSEX_ADAM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tsex/nn.h"

namespace tsex {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// A trainable region: all of a parameter, or a contiguous column range of it
// (used to train only the appended columns of an embedding matrix).
struct TrainableSlot {
  std::string name;
  Param* param = nullptr;
  Eigen::Index first_col = 0;
  Eigen::Index num_cols = -1;  // -1: through the last column
};

std::vector<TrainableSlot> SlotsFor(const ParamList& params);

class Adam {
 public:
  Adam(std::vector<TrainableSlot> slots, const AdamConfig& config);

  // Applies one update from the gradients currently stored in the slots.
  // Parameter entries outside the slots are never written.
  void Step();

  double GradNorm() const;
  // Rescales slot gradients so their global norm is at most `max_norm`;
  // returns the norm before clipping.
  double ClipGradNorm(double max_norm);

  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  std::int64_t steps() const { return steps_; }
  const std::vector<TrainableSlot>& slots() const { return slots_; }

 private:
  std::vector<TrainableSlot> slots_;
  std::vector<Mat> first_moment_;
  std::vector<Mat> second_moment_;
  AdamConfig config_;
  std::int64_t steps_ = 0;
};

}  // namespace tsex

#endif  // TSEX_ADAM_H_
