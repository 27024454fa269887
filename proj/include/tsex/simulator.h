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

#ifndef TSEX_SIMULATOR_H_
#define TSEX_SIMULATOR_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsex/dataset.h"
#include "tsex/rng.h"
#include "tsex/types.h"
#include "tsex/vocabulary.h"

namespace tsex {

enum class Recipe { kTone, kChirp, kBandNoise, kAmTone };

struct ToyClass {
  std::string name;
  Recipe recipe;
  double center_hz;
};

// Synthetic sound-event classes, each confined to its own frequency band.
class ToyClassBank {
 public:
  static constexpr double kHalfBandHz = 110.0;

  // Eight seen classes followed by four held-out ones.
  static ToyClassBank Default();

  const std::vector<ToyClass>& classes() const { return classes_; }
  const ToyClass& Find(const std::string& name) const;
  std::vector<std::string> SeenNames() const;
  std::vector<std::string> NewNames() const;

  // Unit-RMS sample with raised-cosine fades.
  Vec Synthesize(const ToyClass& toy, std::size_t length, Rng& rng) const;

 private:
  std::vector<ToyClass> classes_;
  int num_seen_ = 0;
};

// Isolated samples per class id.
struct SamplePool {
  std::vector<std::vector<Waveform>> samples;

  int num_classes() const { return static_cast<int>(samples.size()); }
  int Size(int class_id) const;
  const Waveform& Get(int class_id, int index) const;
};

struct SimulatorConfig {
  double scene_duration_s = 1.0;
  double event_min_s = 0.3;
  double event_max_s = 0.8;
  int min_sources = 3;
  int max_sources = 3;
  int min_targets = 1;
  int max_targets = 1;
  double snr_min_db = 15.0;
  double snr_max_db = 25.0;
  double gain_range_db = 3.0;
  double inactive_fraction = 0.1;
  double event_rms = 0.08;
  double noise_smoothing = 0.6;
  int num_train = 200;
  int num_valid = 50;
  int num_test = 50;
  int pool_train_per_class = 20;
  int pool_test_per_class = 10;
  std::vector<std::string> classes;  // empty: the bank's seen classes
  std::uint64_t seed = 1;

  static SimulatorConfig Toy();
  static SimulatorConfig Full();
  void Validate() const;
  nlohmann::json ToJson() const;
  std::size_t SceneLength() const;
};

SamplePool BuildPool(const ToyClassBank& bank, const Vocabulary& vocabulary,
                     int per_class, const SimulatorConfig& config, Rng& rng);

struct EventSpec {
  int class_id = 0;
  int pool_index = 0;
  double onset_s = 0.0;
  double gain_db = 0.0;
};

struct SceneSpec {
  double duration_s = 0.0;
  std::vector<EventSpec> events;
  double snr_db = 20.0;
  std::uint64_t noise_seed = 0;
  TargetSpec target;
};

class SceneSimulator {
 public:
  // `pool` must outlive the simulator.
  SceneSimulator(const SimulatorConfig& config, const SamplePool* pool);

  SceneSpec SampleSpec(Rng& rng) const;
  MixtureExample Synthesize(const SceneSpec& spec) const;
  Waveform SampleEnrollment(int class_id, Rng& rng,
                            std::optional<int> exclude) const;
  // Spec, mixture and one enrollment per target label.
  TrainingExample MakeExample(const std::string& id, Rng& rng) const;

  // Random onset that keeps the whole event inside the scene, and a
  // random gain.
  EventSpec PlaceEvent(int class_id, int pool_index, Rng& rng) const;

  const SimulatorConfig& config() const { return config_; }

 private:

  SimulatorConfig config_;
  const SamplePool* pool_;
};

struct SimulatedDataset {
  Vocabulary vocabulary;
  SamplePool train_pool;
  SamplePool test_pool;
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> valid;
  std::vector<TrainingExample> test;
};

SimulatedDataset GenerateDataset(const SimulatorConfig& config,
                                 const ToyClassBank& bank);

// Writes vocabulary.txt, pool/, train/valid/test audio and manifests.
void MaterializeDataset(const SimulatedDataset& dataset,
                        const SimulatorConfig& config,
                        const std::filesystem::path& out_dir);

void WritePool(const SamplePool& pool, const Vocabulary& vocabulary,
               const std::filesystem::path& dir);
SamplePool LoadPool(const std::filesystem::path& dir,
                    const Vocabulary& vocabulary);

// Mixtures holding one new-class enrollment, `seen_per_mixture` seen-class
// pool samples and noise; targets cycle through the new classes.
std::vector<TrainingExample> GenerateAdaptationSet(
    const std::map<int, std::vector<Waveform>>& enrollments,
    const SamplePool& seen_pool, const SimulatorConfig& config, Rng& rng,
    int size, int seen_per_mixture = 2);

}  // namespace tsex

#endif  // TSEX_SIMULATOR_H_
