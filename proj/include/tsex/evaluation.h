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

#ifndef TSEX_EVALUATION_H_
#define TSEX_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tsex/dataset.h"
#include "tsex/types.h"

namespace tsex {

class TseModel;
struct SamplePool;

inline constexpr double kSiSdrClampDb = 60.0;
inline constexpr double kAttenuationFloorDb = -80.0;

// Scale-invariant SDR in dB, clamped to +-60.
double SiSdr(const Waveform& est, const Waveform& ref);
double SiSdr(const Vec& est, const Vec& ref);
double SdrImprovement(const Waveform& est, const Waveform& ref,
                      const Waveform& mixture);
// 10 log10(|est|^2 / |y|^2), floored at -80 dB.
double AttenuationMix(const Waveform& est, const Waveform& mixture);
double AttenuationSrc(const Waveform& est, const Waveform& stem);
// Stem with the least energy; ties go to the lowest class id.
const Waveform& MinPowerStem(const MixtureExample& example);

struct RocCurve {
  double auc = 0.0;
  // (false positive rate, recall) from (0, 0) to (1, 1).
  std::vector<std::pair<double, double>> points;
};

// Inactive targets are the positive class and are expected to score lower.
RocCurve InactiveDetectionAuc(const std::vector<double>& scores,
                              const std::vector<bool>& inactive);

struct MapResult {
  double map = 0.0;
  std::vector<int> classes;  // classes that had at least one positive
  std::vector<double> average_precision;
};

MapResult MeanAveragePrecision(const std::vector<Vec>& posteriors,
                               const std::vector<LabelSet>& references);

enum class ClueMode { kClass, kEnroll };
ClueMode ParseClueMode(const std::string& text);
std::string ClueModeName(ClueMode mode);

struct EvalRow {
  std::string example_id;
  std::vector<int> labels;
  bool active = true;
  bool probe = false;  // extra query for a class absent from the mixture
  double si_sdr_db = 0.0;
  double sdri_db = 0.0;
  double atten_mix_db = 0.0;
  double atten_src_db = 0.0;
  double detection_score = 0.0;
};

struct EvalAggregates {
  int active_count = 0;
  int inactive_count = 0;
  double mean_si_sdr_db = 0.0;
  double mean_sdri_db = 0.0;
  double mean_atten_mix_inactive_db = 0.0;
  double mean_atten_src_inactive_db = 0.0;
  double auc = 0.0;  // NaN when only one label value is present
};

struct EvalReport {
  std::string clue_mode;
  std::vector<EvalRow> rows;
  EvalAggregates aggregates;
  nlohmann::json config = nlohmann::json::object();
};

EvalAggregates ComputeAggregates(const std::vector<EvalRow>& rows);

struct EvalOptions {
  ClueMode clue_mode = ClueMode::kClass;
  // Add one query per active mixture for a randomly chosen absent class.
  bool probe_inactive = true;
  std::uint64_t seed = 7;
  // Source of enrollments for probe queries in enrollment mode.
  const SamplePool* probe_pool = nullptr;
};

EvalReport RunEval(const std::vector<TrainingExample>& examples,
                   const TseModel& model, const EvalOptions& options);

// <prefix>.rows.jsonl, <prefix>.summary.json and <prefix>.summary.csv.
void WriteReport(const EvalReport& report, const std::filesystem::path& prefix);

}  // namespace tsex

#endif  // TSEX_EVALUATION_H_
