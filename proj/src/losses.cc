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

#include "tsex/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsex/classifier.h"
#include "tsex/errors.h"
#include "tsex/model.h"

namespace tsex {
namespace {

constexpr double kDbPerLn = 10.0 / 2.302585092994046;  // 10 / ln(10)

void RequireSameLength(const Vec& a, const Vec& b, const char* what) {
  Require(a.size() == b.size(), ErrorCategory::kLength,
          std::string(what) + ": length mismatch " + std::to_string(a.size()) +
              " vs " + std::to_string(b.size()));
}

}  // namespace

double LossConfig::sdr_floor() const { return std::pow(10.0, -sdr_ceiling_db / 10.0); }

void LossConfig::Validate() const {
  Require(std::isfinite(sdr_ceiling_db), ErrorCategory::kConfig, "sdr_ceiling_db must be finite");
  Require(inactive_floor > 0.0, ErrorCategory::kConfig,
          "inactive_floor must be positive");
  Require(class_weight >= 0.0 && class_weight <= 1.0, ErrorCategory::kConfig,
          "class_weight must lie in [0, 1]");
  Require(inactive_fraction >= 0.0 && inactive_fraction < 1.0,
          ErrorCategory::kConfig, "inactive_fraction must lie in [0, 1)");
}

LossValue ThresholdedSdrLoss(const Vec& est, const Vec& ref, double tau) {
  RequireSameLength(est, ref, "thresholded SDR loss");
  const double ref_energy = ref.squaredNorm();
  Require(ref_energy > 0.0, ErrorCategory::kPrecondition,
          "thresholded SDR loss needs a nonzero reference");
  const Vec residual = ref - est;
  const double denom = residual.squaredNorm() + tau * ref_energy;
  LossValue out;
  out.value = 10.0 * std::log10(denom) - 10.0 * std::log10(ref_energy);
  out.grad = (-2.0 * kDbPerLn / denom) * residual;
  return out;
}

LossValue InactiveLoss(const Vec& est, const Vec& mixture,
                       double inactive_floor) {
  RequireSameLength(est, mixture, "inactive loss");
  const double denom = est.squaredNorm() + inactive_floor * mixture.squaredNorm();
  // A NaN estimate must reach the caller's divergence check, not fail here.
  Require(!(denom <= 0.0), ErrorCategory::kPrecondition,
          "inactive loss needs a nonzero mixture");
  LossValue out;
  out.value = 10.0 * std::log10(denom);
  out.grad = (2.0 * kDbPerLn / denom) * est;
  return out;
}

LossValue CombinedLoss(const Vec& est, const Vec& target_stem,
                       const Vec& mixture, const LossConfig& config) {
  if (target_stem.isZero(0.0)) {
    return InactiveLoss(est, mixture, config.inactive_floor);
  }
  return ThresholdedSdrLoss(est, target_stem, config.sdr_floor());
}

double ThresholdedSdrLoss(const Waveform& est, const Waveform& ref,
                          double tau) {
  return ThresholdedSdrLoss(est.samples(), ref.samples(), tau).value;
}

double InactiveLoss(const Waveform& est, const Waveform& mixture,
                    double inactive_floor) {
  return InactiveLoss(est.samples(), mixture.samples(), inactive_floor).value;
}

double CombinedLoss(const Waveform& est, const Waveform& target_stem,
                    const Waveform& mixture, const LossConfig& config) {
  return CombinedLoss(est.samples(), target_stem.samples(), mixture.samples(),
                      config)
      .value;
}

double MeanLoss(const std::vector<double>& values) {
  Require(!values.empty(), ErrorCategory::kPrecondition, "empty batch");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double ClueLoss(TseModel& model, const Vec& mixture, const Clue& clue,
                const Vec& target_stem, const LossConfig& config,
                double weight) {
  if (weight == 0.0) {
    const Vec est = model.Forward(mixture, clue, nullptr);
    return CombinedLoss(est, target_stem, mixture, config).value;
  }
  TseModel::Pass pass;
  const Vec est = model.Forward(mixture, clue, &pass);
  const LossValue loss = CombinedLoss(est, target_stem, mixture, config);
  if (std::isfinite(loss.value)) model.Backward(pass, weight * loss.grad);
  return loss.value;
}

MixedClueTerms MixedClueLoss(TseModel& model, const Vec& mixture,
                             const Vec& target_stem, const LabelSet& labels,
                             const EnrollmentSet& enrollments,
                             const LossConfig& config, double grad_weight) {
  Require(!enrollments.audios.empty(), ErrorCategory::kConfig,
          "mixed training needs an enrollment for every example");
  const double a = config.class_weight;
  MixedClueTerms t;
  t.class_term = ClueLoss(model, mixture, Clue(labels), target_stem, config,
                          grad_weight * a);
  t.enroll_term = ClueLoss(model, mixture, Clue(enrollments), target_stem,
                           config, grad_weight * (1.0 - a));
  t.total = a * t.class_term + (1.0 - a) * t.enroll_term;
  return t;
}

PitResult PitLoss(const std::vector<Vec>& estimates,
                  const std::vector<Vec>& references, double tau) {
  const int m = static_cast<int>(estimates.size());
  Require(m == static_cast<int>(references.size()), ErrorCategory::kShape,
          "PIT needs as many estimates as references");
  Require(m >= 1 && m <= 4, ErrorCategory::kPrecondition,
          "PIT brute force supports 1 to 4 outputs");

  // Pairwise table first; every permutation is then a sum of lookups.
  std::vector<std::vector<LossValue>> pair(m, std::vector<LossValue>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      pair[i][j] = ThresholdedSdrLoss(estimates[i], references[j], tau);
    }
  }
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  PitResult best;
  best.value = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) sum += pair[i][perm[i]].value;
    const double mean = sum / m;
    if (mean < best.value) {
      best.value = mean;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  best.grads.resize(m);
  for (int i = 0; i < m; ++i) {
    best.grads[i] = pair[i][best.permutation[i]].grad / m;
  }
  return best;
}

LossValue BinaryCrossEntropy(const Vec& posterior, const Vec& target) {
  Require(posterior.size() == target.size(), ErrorCategory::kShape,
          "posterior and target sizes differ");
  constexpr double kFloor = 1e-12;
  LossValue out;
  out.grad = Vec::Zero(posterior.size());
  for (Eigen::Index k = 0; k < posterior.size(); ++k) {
    const double p = posterior[k];
    const double t = target[k];
    // Terms with zero weight are skipped so that p = t in {0, 1} gives 0.
    if (t > 0.0) {
      const double q = std::max(p, kFloor);
      out.value -= t * std::log(q);
      out.grad[k] -= t / q;
    }
    if (t < 1.0) {
      const double q = std::max(1.0 - p, kFloor);
      out.value -= (1.0 - t) * std::log(q);
      out.grad[k] += (1.0 - t) / q;
    }
  }
  return out;
}

LossValue SecWeakLoss(const Vec& est, const LabelSet& target_labels,
                      const Classifier& classifier) {
  Vec target = Vec::Zero(classifier.num_classes());
  for (int id : target_labels.ids) {
    Require(id >= 0 && id < classifier.num_classes(), ErrorCategory::kVocabulary,
            "weak label outside classifier vocabulary");
    target[id] = 1.0;
  }
  Classifier::Cache cache;
  const Vec posterior = classifier.Forward(est, &cache);
  const LossValue bce = BinaryCrossEntropy(posterior, target);
  LossValue out;
  out.value = bce.value;
  out.grad = classifier.InputGradient(cache, bce.grad);
  return out;
}

}  // namespace tsex
