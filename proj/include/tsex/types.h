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

#ifndef TSEX_TYPES_H_
#define TSEX_TYPES_H_

#include <cstddef>
#include <map>
#include <set>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace tsex {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// All audio in the toolkit runs at this rate; files at other rates are
// rejected on load.
inline constexpr int kSampleRate = 8000;

// Immutable mono audio buffer with values nominally in [-1, 1].
class Waveform {
 public:
  Waveform() = default;
  explicit Waveform(Vec samples, int sample_rate = kSampleRate);
  explicit Waveform(const std::vector<double>& samples,
                    int sample_rate = kSampleRate);

  static Waveform Zeros(std::size_t length, int sample_rate = kSampleRate);

  const Vec& samples() const { return samples_; }
  std::size_t size() const { return static_cast<std::size_t>(samples_.size()); }
  bool empty() const { return samples_.size() == 0; }
  int sample_rate() const { return sample_rate_; }
  double duration_s() const {
    return static_cast<double>(size()) / sample_rate_;
  }

  double Energy() const { return samples_.squaredNorm(); }
  bool IsSilent() const;

  Waveform operator+(const Waveform& other) const;
  Waveform operator-(const Waveform& other) const;
  Waveform Scaled(double factor) const;

 private:
  Vec samples_;
  int sample_rate_ = kSampleRate;
};

// Throws a length error unless both waveforms have identical rate and size.
void RequireCompatible(const Waveform& a, const Waveform& b);

// Sorted, duplicate-free list of class ids.
struct LabelSet {
  std::vector<int> ids;

  static LabelSet Of(std::vector<int> ids);
};

struct EnrollmentSet {
  std::vector<Waveform> audios;
};

using Clue = std::variant<LabelSet, EnrollmentSet>;

// Validates a clue against the vocabulary size and the analysis frame length.
void ValidateClue(const Clue& clue, int num_classes, int frame_length);

struct TargetSpec {
  std::vector<int> labels;
  bool inactive = false;
};

struct MixtureExample {
  Waveform mixture;
  // Present classes only; a requested class missing here is inactive.
  std::map<int, Waveform> stems;
  Waveform noise;
  std::set<int> active_classes;
  TargetSpec target;
  double duration_s = 0.0;
  double snr_db = 0.0;

  // Sum of the stems of `labels`; all-zero when none of them is present.
  Waveform TargetReference(const std::vector<int>& labels) const;
  Waveform StemOrSilence(int class_id) const;
};

// Relative L2 error of mixture - (sum of stems + noise).
double ReconstructionError(const MixtureExample& example);

}  // namespace tsex

#endif  // TSEX_TYPES_H_
