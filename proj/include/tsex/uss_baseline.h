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

#ifndef TSEX_USS_BASELINE_H_
#define TSEX_USS_BASELINE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "tsex/codec.h"
#include "tsex/dataset.h"
#include "tsex/extraction.h"
#include "tsex/losses.h"

namespace tsex {

struct SeparatorConfig {
  CodecConfig codec;
  ExtractorConfig extractor;
  int num_outputs = 3;

  void Validate() const;
  nlohmann::json ToJson() const;
  static SeparatorConfig FromJson(const nlohmann::json& json);
};

// Fixed-output-count mask separator: the extraction stacks without the
// adaptation layer, and one mask per output.
class Separator {
 public:
  struct Cache {
    std::size_t length = 0;
    Encoder::Cache encoder;
    Mat features;
    MixtureNet::Cache mix;
    MaskNet::Cache masks;
    std::vector<Mat> masked;
  };

  Separator() = default;
  Separator(const SeparatorConfig& config, std::uint64_t seed);

  std::vector<Vec> Forward(const Vec& mixture, Cache* cache) const;
  void Backward(const Cache& cache, const std::vector<Vec>& doutputs);
  std::vector<Waveform> Separate(const Waveform& mixture) const;

  ParamList Params();
  const SeparatorConfig& config() const { return config_; }

  void Save(const std::filesystem::path& path) const;
  static Separator Load(const std::filesystem::path& path);

 private:
  SeparatorConfig config_;
  Encoder encoder_;
  MixtureNet mix_;
  MaskNet masks_;
  Decoder decoder_;
};

struct SeparatorTrainConfig {
  int epochs = 10;
  int batch_size = 8;
  double learning_rate = 1e-3;
  double sdr_ceiling_db = 30.0;
  std::uint64_t seed = 1;
  // Every this many optimizer steps, re-check the logged PIT loss against
  // an independent exhaustive search.
  int audit_every = 0;
};

struct SeparatorTrainReport {
  std::vector<double> train_losses;  // per epoch
  std::vector<double> valid_losses;
  int audits = 0;
  double max_audit_error = 0.0;
};

// Stems of `example` ordered by class id; the reference list for PIT.
std::vector<Vec> PitReferences(const MixtureExample& example);

double SeparatorLoss(const Separator& separator,
                     const std::vector<TrainingExample>& data, double tau);

SeparatorTrainReport TrainSeparator(Separator* separator,
                                    const std::vector<TrainingExample>& train,
                                    const std::vector<TrainingExample>& valid,
                                    const SeparatorTrainConfig& config);

// Output with the highest SI-SDR against `target_stem`; ties go to the
// lowest index.
int OracleSelect(const std::vector<Waveform>& separated,
                 const Waveform& target_stem);

}  // namespace tsex

#endif  // TSEX_USS_BASELINE_H_
