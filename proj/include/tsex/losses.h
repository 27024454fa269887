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

#ifndef TSEX_LOSSES_H_
#define TSEX_LOSSES_H_

#include <vector>

#include "tsex/types.h"

namespace tsex {

class Classifier;
class TseModel;

struct LossConfig {
  double sdr_ceiling_db = 30.0;         // soft threshold of the SDR loss
  double inactive_floor = 1e-2;
  double class_weight = 0.5;    // weight of the class-label branch
  double inactive_fraction = 0.1;

  double sdr_floor() const;
  void Validate() const;
};

// A scalar loss and its gradient with respect to the estimate.
struct LossValue {
  double value = 0.0;
  Vec grad;
};

// 10 log10(|x - est|^2 + tau |x|^2) - 10 log10 |x|^2, in dB.
LossValue ThresholdedSdrLoss(const Vec& est, const Vec& ref, double tau);
// 10 log10(|est|^2 + inactive_floor |y|^2), in dB.
LossValue InactiveLoss(const Vec& est, const Vec& mixture, double inactive_floor);
// Routes on whether the target stem is silent.
LossValue CombinedLoss(const Vec& est, const Vec& target_stem,
                       const Vec& mixture, const LossConfig& config);

double ThresholdedSdrLoss(const Waveform& est, const Waveform& ref, double tau);
double InactiveLoss(const Waveform& est, const Waveform& mixture,
                    double inactive_floor);
double CombinedLoss(const Waveform& est, const Waveform& target_stem,
                    const Waveform& mixture, const LossConfig& config);
double MeanLoss(const std::vector<double>& values);

// Runs one forward pass of `model` for `clue`, scores it with CombinedLoss
// and, if `weight` is nonzero, back-propagates weight * gradient into the
// model's parameter gradients. Returns the unweighted loss.
double ClueLoss(TseModel& model, const Vec& mixture, const Clue& clue,
                const Vec& target_stem, const LossConfig& config,
                double weight);

struct MixedClueTerms {
  double total = 0.0;
  double class_term = 0.0;
  double enroll_term = 0.0;
};

// w * L(class clue) + (1 - w) * L(enrollment clue), w = class_weight. Two forward
// passes per call. With a nonzero `grad_weight` the gradient of
// grad_weight * total is accumulated, one backward pass per branch.
MixedClueTerms MixedClueLoss(TseModel& model, const Vec& mixture,
                             const Vec& target_stem, const LabelSet& labels,
                             const EnrollmentSet& enrollments,
                             const LossConfig& config, double grad_weight);

struct PitResult {
  double value = 0.0;
  // permutation[i] is the reference assigned to estimate i.
  std::vector<int> permutation;
  std::vector<Vec> grads;
};

// Minimum over all assignments of the mean thresholded SDR loss. Ties keep
// the lexicographically first permutation.
PitResult PitLoss(const std::vector<Vec>& estimates,
                  const std::vector<Vec>& references, double tau);

// Sum over classes of the binary cross-entropy in nats; gradient with
// respect to the posterior.
LossValue BinaryCrossEntropy(const Vec& posterior, const Vec& target);

// BCE of the frozen classifier's posterior for `est` against the n-hot
// target. The gradient is with respect to `est`; classifier parameters
// receive nothing.
LossValue SecWeakLoss(const Vec& est, const LabelSet& target_labels,
                      const Classifier& classifier);

}  // namespace tsex

#endif  // TSEX_LOSSES_H_
