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

#include "tsex/types.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsex/errors.h"

namespace tsex {

Waveform::Waveform(Vec samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  Require(sample_rate_ > 0, ErrorCategory::kPrecondition,
          "sample rate must be positive");
  Require(samples_.allFinite(), ErrorCategory::kPrecondition,
          "waveform contains non-finite samples");
}

Waveform::Waveform(const std::vector<double>& samples, int sample_rate)
    : Waveform(Eigen::Map<const Vec>(samples.data(),
                                     static_cast<Eigen::Index>(samples.size())),
               sample_rate) {}

Waveform Waveform::Zeros(std::size_t length, int sample_rate) {
  return Waveform(Vec::Zero(static_cast<Eigen::Index>(length)), sample_rate);
}

bool Waveform::IsSilent() const {
  return samples_.size() == 0 || (samples_.array() == 0.0).all();
}

void RequireCompatible(const Waveform& a, const Waveform& b) {
  Require(a.sample_rate() == b.sample_rate(), ErrorCategory::kLength,
          "sample rate mismatch: " + std::to_string(a.sample_rate()) +
              " vs " + std::to_string(b.sample_rate()));
  Require(a.size() == b.size(), ErrorCategory::kLength,
          "length mismatch: " + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()));
}

Waveform Waveform::operator+(const Waveform& other) const {
  RequireCompatible(*this, other);
  return Waveform(Vec(samples_ + other.samples_), sample_rate_);
}

Waveform Waveform::operator-(const Waveform& other) const {
  RequireCompatible(*this, other);
  return Waveform(Vec(samples_ - other.samples_), sample_rate_);
}

Waveform Waveform::Scaled(double factor) const {
  return Waveform(Vec(samples_ * factor), sample_rate_);
}

LabelSet LabelSet::Of(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return LabelSet{std::move(ids)};
}

void ValidateClue(const Clue& clue, int num_classes, int frame_length) {
  if (const auto* labels = std::get_if<LabelSet>(&clue)) {
    for (int id : labels->ids) {
      Require(id >= 0 && id < num_classes, ErrorCategory::kVocabulary,
              "class id " + std::to_string(id) + " outside [0, " +
                  std::to_string(num_classes) + ")");
    }
    return;
  }
  const auto& enrollments = std::get<EnrollmentSet>(clue);
  Require(!enrollments.audios.empty(), ErrorCategory::kPrecondition,
          "enrollment clue needs at least one waveform");
  for (const Waveform& audio : enrollments.audios) {
    Require(audio.size() >= static_cast<std::size_t>(frame_length),
            ErrorCategory::kLength,
            "enrollment shorter than one analysis frame");
  }
}

Waveform MixtureExample::StemOrSilence(int class_id) const {
  auto it = stems.find(class_id);
  if (it == stems.end() || it->second.empty()) {
    return Waveform::Zeros(mixture.size(), mixture.sample_rate());
  }
  return it->second;
}

Waveform MixtureExample::TargetReference(
    const std::vector<int>& labels) const {
  Vec sum = Vec::Zero(static_cast<Eigen::Index>(mixture.size()));
  for (int id : labels) {
    auto it = stems.find(id);
    if (it != stems.end() && !it->second.empty()) sum += it->second.samples();
  }
  return Waveform(std::move(sum), mixture.sample_rate());
}

double ReconstructionError(const MixtureExample& example) {
  Vec residual = example.mixture.samples();
  for (const auto& [id, stem] : example.stems) {
    if (!stem.empty()) residual -= stem.samples();
  }
  residual -= example.noise.samples();
  const double norm = example.mixture.samples().norm();
  return norm > 0.0 ? residual.norm() / norm : residual.norm();
}

}  // namespace tsex
