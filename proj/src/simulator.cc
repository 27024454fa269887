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

#include "tsex/simulator.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <spdlog/spdlog.h>

#include "tsex/errors.h"
#include "tsex/wav_io.h"

namespace tsex {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFadeS = 0.02;

// Streams of the dataset-level generator.
constexpr std::uint64_t kPoolTrainStream = 11;
constexpr std::uint64_t kPoolTestStream = 12;
constexpr std::uint64_t kSplitStreamBase = 100;

std::size_t Samples(double seconds) {
  return static_cast<std::size_t>(std::llround(seconds * kSampleRate));
}

void ApplyFades(Vec& x) {
  const Eigen::Index fade =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(Samples(kFadeS)),
                             x.size() / 2);
  for (Eigen::Index n = 0; n < fade; ++n) {
    const double w =
        0.5 - 0.5 * std::cos(std::numbers::pi * (n + 0.5) / fade);
    x[n] *= w;
    x[x.size() - 1 - n] *= w;
  }
}

Vec LowPassNoise(std::size_t length, double smoothing, std::uint64_t seed) {
  Rng rng(seed);
  Vec y(static_cast<Eigen::Index>(length));
  double state = 0.0;
  for (Eigen::Index n = 0; n < y.size(); ++n) {
    state = smoothing * state + (1.0 - smoothing) * rng.Normal();
    y[n] = state;
  }
  return y;
}

// Integer PCM grid values of x, before any range check.
Vec ToGrid(const Vec& x) { return (x.array() * kPcmScale).round(); }

}  // namespace

// ----------------------------------------------------------- ToyClassBank

ToyClassBank ToyClassBank::Default() {
  // Band k is centred at 250 + 300 k Hz. Seen and new classes interleave so
  // that every recipe appears in both groups.
  auto center = [](int band) { return 250.0 + 300.0 * band; };
  ToyClassBank bank;
  bank.classes_ = {
      {"tone_a", Recipe::kTone, center(0)},
      {"chirp_b", Recipe::kChirp, center(1)},
      {"noise_c", Recipe::kBandNoise, center(3)},
      {"am_d", Recipe::kAmTone, center(4)},
      {"tone_e", Recipe::kTone, center(6)},
      {"chirp_f", Recipe::kChirp, center(7)},
      {"noise_g", Recipe::kBandNoise, center(9)},
      {"am_h", Recipe::kAmTone, center(10)},
      {"tone_i", Recipe::kTone, center(2)},
      {"chirp_j", Recipe::kChirp, center(5)},
      {"noise_k", Recipe::kBandNoise, center(8)},
      {"am_l", Recipe::kAmTone, center(11)},
  };
  bank.num_seen_ = 8;
  return bank;
}

const ToyClass& ToyClassBank::Find(const std::string& name) const {
  for (const auto& c : classes_) {
    if (c.name == name) return c;
  }
  Fail(ErrorCategory::kVocabulary, "no toy recipe for class '" + name + "'");
}

std::vector<std::string> ToyClassBank::SeenNames() const {
  std::vector<std::string> out;
  for (int i = 0; i < num_seen_; ++i) out.push_back(classes_[i].name);
  return out;
}

std::vector<std::string> ToyClassBank::NewNames() const {
  std::vector<std::string> out;
  for (std::size_t i = num_seen_; i < classes_.size(); ++i) {
    out.push_back(classes_[i].name);
  }
  return out;
}

Vec ToyClassBank::Synthesize(const ToyClass& toy, std::size_t length,
                             Rng& rng) const {
  Require(length > 0, ErrorCategory::kLength, "empty toy sample");
  const Eigen::Index n_samples = static_cast<Eigen::Index>(length);
  const double fs = kSampleRate;
  const double lo = toy.center_hz - kHalfBandHz;
  const double hi = toy.center_hz + kHalfBandHz;
  Vec x(n_samples);
  switch (toy.recipe) {
    case Recipe::kTone: {
      const double f = toy.center_hz + rng.Uniform(-40.0, 40.0);
      const double phase = rng.Uniform(0.0, kTwoPi);
      for (Eigen::Index n = 0; n < n_samples; ++n) {
        x[n] = std::sin(kTwoPi * f * n / fs + phase);
      }
      break;
    }
    case Recipe::kChirp: {
      double f0 = lo + 10.0, f1 = hi - 10.0;
      if (rng.Bernoulli(0.5)) std::swap(f0, f1);
      const double duration = n_samples / fs;
      const double phase = rng.Uniform(0.0, kTwoPi);
      for (Eigen::Index n = 0; n < n_samples; ++n) {
        const double t = n / fs;
        x[n] = std::sin(kTwoPi * (f0 * t + 0.5 * (f1 - f0) / duration * t * t) +
                        phase);
      }
      break;
    }
    case Recipe::kBandNoise: {
      x.setZero();
      for (int k = 0; k < 30; ++k) {
        const double f = rng.Uniform(lo, hi);
        const double a = rng.Uniform(0.5, 1.0);
        const double phase = rng.Uniform(0.0, kTwoPi);
        for (Eigen::Index n = 0; n < n_samples; ++n) {
          x[n] += a * std::sin(kTwoPi * f * n / fs + phase);
        }
      }
      break;
    }
    case Recipe::kAmTone: {
      const double f = toy.center_hz + rng.Uniform(-30.0, 30.0);
      const double fm = rng.Uniform(4.0, 12.0);
      const double phase = rng.Uniform(0.0, kTwoPi);
      for (Eigen::Index n = 0; n < n_samples; ++n) {
        const double t = n / fs;
        x[n] = (1.0 + 0.8 * std::sin(kTwoPi * fm * t)) *
               std::sin(kTwoPi * f * t + phase);
      }
      break;
    }
  }
  ApplyFades(x);
  const double rms = std::sqrt(x.squaredNorm() / n_samples);
  return x / rms;
}

// ------------------------------------------------------------- SamplePool

int SamplePool::Size(int class_id) const {
  Require(class_id >= 0 && class_id < num_classes(), ErrorCategory::kVocabulary,
          "class " + std::to_string(class_id) + " has no sample pool");
  return static_cast<int>(samples[class_id].size());
}

const Waveform& SamplePool::Get(int class_id, int index) const {
  Require(index >= 0 && index < Size(class_id), ErrorCategory::kPrecondition,
          "pool index out of range");
  return samples[class_id][index];
}

SamplePool BuildPool(const ToyClassBank& bank, const Vocabulary& vocabulary,
                     int per_class, const SimulatorConfig& config, Rng& rng) {
  SamplePool pool;
  pool.samples.resize(vocabulary.size());
  for (int c = 0; c < vocabulary.size(); ++c) {
    const ToyClass& toy = bank.Find(vocabulary.Name(c));
    for (int i = 0; i < per_class; ++i) {
      const std::size_t length =
          Samples(rng.Uniform(config.event_min_s, config.event_max_s));
      const Vec x = bank.Synthesize(toy, length, rng) * config.event_rms;
      pool.samples[c].emplace_back(QuantizeToPcm16(x));
    }
  }
  return pool;
}

// -------------------------------------------------------- SimulatorConfig

SimulatorConfig SimulatorConfig::Toy() { return SimulatorConfig(); }

SimulatorConfig SimulatorConfig::Full() {
  SimulatorConfig c;
  c.scene_duration_s = 6.0;
  c.event_min_s = 2.0;
  c.event_max_s = 5.0;
  c.num_train = 50000;
  c.num_valid = 10000;
  c.num_test = 3000;
  c.pool_train_per_class = 200;
  c.pool_test_per_class = 50;
  return c;
}

void SimulatorConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) {
    Require(ok, ErrorCategory::kConfig, "simulator: " + what);
  };
  check(scene_duration_s > 0.0, "scene_duration_s must be positive");
  check(event_min_s > 0.0 && event_min_s <= event_max_s,
        "need 0 < event_min_s <= event_max_s");
  check(event_max_s <= scene_duration_s, "events must fit in the scene");
  check(min_sources >= 0 && min_sources <= max_sources,
        "need 0 <= min_sources <= max_sources");
  check(min_targets >= 1 && min_targets <= max_targets,
        "need 1 <= min_targets <= max_targets");
  check(max_targets <= std::max(min_sources, 1) || min_sources == 0,
        "max_targets exceeds min_sources");
  check(snr_min_db <= snr_max_db, "need snr_min_db <= snr_max_db");
  check(gain_range_db >= 0.0, "gain_range_db must be non-negative");
  check(inactive_fraction >= 0.0 && inactive_fraction < 1.0,
        "inactive_fraction must lie in [0, 1)");
  check(event_rms > 0.0, "event_rms must be positive");
  check(noise_smoothing >= 0.0 && noise_smoothing < 1.0,
        "noise_smoothing must lie in [0, 1)");
  check(num_train >= 0 && num_valid >= 0 && num_test >= 0,
        "split sizes must be non-negative");
  check(pool_train_per_class >= 2 && pool_test_per_class >= 2,
        "pools need at least two samples per class");
}

nlohmann::json SimulatorConfig::ToJson() const {
  return {{"scene_duration_s", scene_duration_s},
          {"event_min_s", event_min_s},
          {"event_max_s", event_max_s},
          {"min_sources", min_sources},
          {"max_sources", max_sources},
          {"min_targets", min_targets},
          {"max_targets", max_targets},
          {"snr_min_db", snr_min_db},
          {"snr_max_db", snr_max_db},
          {"gain_range_db", gain_range_db},
          {"inactive_fraction", inactive_fraction},
          {"event_rms", event_rms},
          {"noise_smoothing", noise_smoothing},
          {"num_train", num_train},
          {"num_valid", num_valid},
          {"num_test", num_test},
          {"pool_train_per_class", pool_train_per_class},
          {"pool_test_per_class", pool_test_per_class},
          {"classes", classes},
          {"seed", seed}};
}

std::size_t SimulatorConfig::SceneLength() const {
  return Samples(scene_duration_s);
}

// --------------------------------------------------------- SceneSimulator

SceneSimulator::SceneSimulator(const SimulatorConfig& config,
                               const SamplePool* pool)
    : config_(config), pool_(pool) {
  config_.Validate();
  Require(pool_ != nullptr, ErrorCategory::kPrecondition, "no sample pool");
}

EventSpec SceneSimulator::PlaceEvent(int class_id, int pool_index,
                                     Rng& rng) const {
  const std::size_t length = pool_->Get(class_id, pool_index).size();
  const std::size_t scene = config_.SceneLength();
  const std::size_t slack = scene > length ? scene - length : 0;
  EventSpec e;
  e.class_id = class_id;
  e.pool_index = pool_index;
  e.onset_s = static_cast<double>(rng.UniformInt(0, static_cast<int>(slack))) /
              kSampleRate;
  e.gain_db = rng.Uniform(-config_.gain_range_db, config_.gain_range_db);
  return e;
}

SceneSpec SceneSimulator::SampleSpec(Rng& rng) const {
  const int num_classes = pool_->num_classes();
  const int m = rng.UniformInt(config_.min_sources, config_.max_sources);
  const bool inactive = config_.inactive_fraction > 0.0 &&
                        rng.Bernoulli(config_.inactive_fraction);
  const int drawn = m + (inactive ? 1 : 0);
  Require(drawn <= num_classes, ErrorCategory::kPrecondition,
          "scene needs " + std::to_string(drawn) + " classes but only " +
              std::to_string(num_classes) + " are available");
  const std::vector<int> classes = rng.SampleWithoutReplacement(num_classes, drawn);

  SceneSpec spec;
  spec.duration_s = config_.scene_duration_s;
  for (int i = 0; i < m; ++i) {
    const int c = classes[i];
    spec.events.push_back(PlaceEvent(c, rng.UniformInt(0, pool_->Size(c) - 1), rng));
  }
  spec.snr_db = rng.Uniform(config_.snr_min_db, config_.snr_max_db);
  spec.noise_seed = rng.NextU64();
  if (inactive) {
    spec.target.labels = {classes[m]};
    spec.target.inactive = true;
  } else if (m > 0) {
    const int j = std::min(m, rng.UniformInt(config_.min_targets,
                                             config_.max_targets));
    for (int idx : rng.SampleWithoutReplacement(m, j)) {
      spec.target.labels.push_back(classes[idx]);
    }
    std::sort(spec.target.labels.begin(), spec.target.labels.end());
  }
  return spec;
}

MixtureExample SceneSimulator::Synthesize(const SceneSpec& spec) const {
  const std::size_t length = Samples(spec.duration_s);
  const Eigen::Index n = static_cast<Eigen::Index>(length);
  std::map<int, Vec> stems;
  for (const auto& e : spec.events) {
    const Vec& source = pool_->Get(e.class_id, e.pool_index).samples();
    const Eigen::Index onset =
        static_cast<Eigen::Index>(std::llround(e.onset_s * kSampleRate));
    Require(onset >= 0 && onset < n, ErrorCategory::kPrecondition,
            "event onset outside the scene");
    const Eigen::Index count = std::min<Eigen::Index>(source.size(), n - onset);
    auto [it, inserted] = stems.try_emplace(e.class_id, Vec::Zero(n));
    it->second.segment(onset, count) +=
        std::pow(10.0, e.gain_db / 20.0) * source.head(count);
  }

  Vec event_sum = Vec::Zero(n);
  for (const auto& [c, s] : stems) event_sum += s;
  Vec noise = LowPassNoise(length, config_.noise_smoothing, spec.noise_seed);
  const double event_energy = event_sum.squaredNorm();
  const double noise_energy_target =
      event_energy > 0.0
          ? event_energy * std::pow(10.0, -spec.snr_db / 10.0)
          : n * std::pow(config_.event_rms, 2) * std::pow(10.0, -spec.snr_db / 10.0);
  noise *= std::sqrt(noise_energy_target / noise.squaredNorm());

  // Quantize every component to the PCM grid and mix in integers, so the
  // mixture equals the sum of its parts exactly and stays so through WAV.
  double scale = 1.0;
  std::map<int, Vec> grid_stems;
  Vec grid_noise, grid_mix;
  for (int attempt = 0;; ++attempt) {
    grid_stems.clear();
    grid_mix = grid_noise = ToGrid(noise * scale);
    for (const auto& [c, s] : stems) {
      grid_stems[c] = ToGrid(s * scale);
      grid_mix += grid_stems[c];
    }
    const double peak = grid_mix.cwiseAbs().maxCoeff();
    if (peak <= kPcmScale) break;
    Require(attempt < 8, ErrorCategory::kPrecondition, "could not avoid clipping");
    scale *= 0.95 * kPcmScale / peak;
    spdlog::warn("mixture would clip; rescaling all components by {:.4f}", scale);
  }

  MixtureExample ex;
  ex.mixture = Waveform(Vec(grid_mix / kPcmScale));
  ex.noise = Waveform(Vec(grid_noise / kPcmScale));
  for (const auto& [c, g] : grid_stems) {
    ex.stems.emplace(c, Waveform(Vec(g / kPcmScale)));
    ex.active_classes.insert(c);
  }
  ex.target = spec.target;
  ex.duration_s = spec.duration_s;
  ex.snr_db = spec.snr_db;
  return ex;
}

Waveform SceneSimulator::SampleEnrollment(int class_id, Rng& rng,
                                          std::optional<int> exclude) const {
  const int size = pool_->Size(class_id);
  if (!exclude.has_value()) {
    Require(size >= 1, ErrorCategory::kPrecondition, "empty sample pool");
    return pool_->Get(class_id, rng.UniformInt(0, size - 1));
  }
  Require(size >= 2, ErrorCategory::kPrecondition,
          "pool of class " + std::to_string(class_id) +
              " is exhausted after exclusion");
  // Draw from the size-1 eligible members and skip over the excluded one.
  int index = rng.UniformInt(0, size - 2);
  if (index >= *exclude) ++index;
  return pool_->Get(class_id, index);
}

TrainingExample SceneSimulator::MakeExample(const std::string& id,
                                            Rng& rng) const {
  const SceneSpec spec = SampleSpec(rng);
  TrainingExample item;
  item.id = id;
  item.example = Synthesize(spec);
  for (int label : spec.target.labels) {
    std::optional<int> exclude;
    for (const auto& e : spec.events) {
      if (e.class_id == label) exclude = e.pool_index;
    }
    item.enrollments.push_back(SampleEnrollment(label, rng, exclude));
  }
  return item;
}

// ---------------------------------------------------------------- dataset

SimulatedDataset GenerateDataset(const SimulatorConfig& config,
                                 const ToyClassBank& bank) {
  config.Validate();
  SimulatedDataset d;
  d.vocabulary = Vocabulary(config.classes.empty() ? bank.SeenNames()
                                                   : config.classes);
  const Rng root(config.seed);
  Rng pool_train_rng = root.Fork(kPoolTrainStream);
  Rng pool_test_rng = root.Fork(kPoolTestStream);
  d.train_pool = BuildPool(bank, d.vocabulary, config.pool_train_per_class,
                           config, pool_train_rng);
  d.test_pool = BuildPool(bank, d.vocabulary, config.pool_test_per_class,
                          config, pool_test_rng);

  const SceneSimulator train_sim(config, &d.train_pool);
  const SceneSimulator test_sim(config, &d.test_pool);
  auto make_split = [&](const SceneSimulator& sim, const std::string& name,
                        int count, std::uint64_t stream) {
    std::vector<TrainingExample> out;
    out.reserve(count);
    const Rng split_rng = root.Fork(stream);
    for (int i = 0; i < count; ++i) {
      // One sub-stream per record keeps records independent of each other.
      Rng rng = split_rng.Fork(static_cast<std::uint64_t>(i));
      char id[32];
      std::snprintf(id, sizeof(id), "%s_%06d", name.c_str(), i);
      out.push_back(sim.MakeExample(id, rng));
    }
    return out;
  };
  d.train = make_split(train_sim, "train", config.num_train, kSplitStreamBase);
  d.valid = make_split(train_sim, "valid", config.num_valid, kSplitStreamBase + 1);
  d.test = make_split(test_sim, "test", config.num_test, kSplitStreamBase + 2);
  return d;
}

void WritePool(const SamplePool& pool, const Vocabulary& vocabulary,
               const std::filesystem::path& dir) {
  for (int c = 0; c < pool.num_classes(); ++c) {
    for (int i = 0; i < pool.Size(c); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "%04d.wav", i);
      WriteWav(dir / vocabulary.Name(c) / name, pool.Get(c, i));
    }
  }
}

SamplePool LoadPool(const std::filesystem::path& dir,
                    const Vocabulary& vocabulary) {
  SamplePool pool;
  pool.samples.resize(vocabulary.size());
  for (int c = 0; c < vocabulary.size(); ++c) {
    const auto class_dir = dir / vocabulary.Name(c);
    Require(std::filesystem::is_directory(class_dir), ErrorCategory::kIo,
            "missing pool directory " + class_dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(class_dir)) {
      if (entry.path().extension() == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) pool.samples[c].push_back(ReadWav(f));
  }
  return pool;
}

void MaterializeDataset(const SimulatedDataset& dataset,
                        const SimulatorConfig& config,
                        const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  dataset.vocabulary.Save(out_dir / "vocabulary.txt");
  WritePool(dataset.train_pool, dataset.vocabulary, out_dir / "pool" / "train");
  WritePool(dataset.test_pool, dataset.vocabulary, out_dir / "pool" / "test");
  WriteExamples(dataset.train, out_dir, "train");
  WriteExamples(dataset.valid, out_dir, "valid");
  WriteExamples(dataset.test, out_dir, "test");
  std::ofstream(out_dir / "simulator_config.json") << config.ToJson().dump(2)
                                                    << '\n';
}

std::vector<TrainingExample> GenerateAdaptationSet(
    const std::map<int, std::vector<Waveform>>& enrollments,
    const SamplePool& seen_pool, const SimulatorConfig& config, Rng& rng,
    int size, int seen_per_mixture) {
  Require(size >= 1, ErrorCategory::kPrecondition,
          "adaptation set size must be positive");
  Require(!enrollments.empty(), ErrorCategory::kPrecondition,
          "no new classes to adapt");
  Require(seen_pool.num_classes() >= seen_per_mixture,
          ErrorCategory::kPrecondition, "not enough seen classes");
  // One pool over old and new ids; new-class "samples" are the enrollments.
  SamplePool pool = seen_pool;
  std::vector<int> new_ids;
  for (const auto& [id, audios] : enrollments) {
    Require(id >= seen_pool.num_classes(), ErrorCategory::kVocabulary,
            "new class id " + std::to_string(id) + " collides with a seen class");
    Require(!audios.empty(), ErrorCategory::kPrecondition,
            "new class " + std::to_string(id) + " has no enrollments");
    if (static_cast<int>(pool.samples.size()) <= id) pool.samples.resize(id + 1);
    pool.samples[id] = audios;
    new_ids.push_back(id);
  }
  SimulatorConfig adapt_config = config;
  adapt_config.inactive_fraction = 0.0;
  const SceneSimulator sim(adapt_config, &pool);

  std::vector<TrainingExample> out;
  out.reserve(size);
  for (int i = 0; i < size; ++i) {
    Rng r = rng.Fork(static_cast<std::uint64_t>(i));
    const int target = new_ids[i % new_ids.size()];
    const int k = pool.Size(target);
    SceneSpec spec;
    spec.duration_s = adapt_config.scene_duration_s;
    const int shot = r.UniformInt(0, k - 1);
    spec.events.push_back(sim.PlaceEvent(target, shot, r));
    for (int c : r.SampleWithoutReplacement(seen_pool.num_classes(),
                                            seen_per_mixture)) {
      spec.events.push_back(
          sim.PlaceEvent(c, r.UniformInt(0, seen_pool.Size(c) - 1), r));
    }
    spec.snr_db = r.Uniform(adapt_config.snr_min_db, adapt_config.snr_max_db);
    spec.noise_seed = r.NextU64();
    spec.target.labels = {target};

    TrainingExample item;
    char id[32];
    std::snprintf(id, sizeof(id), "adapt_%06d", i);
    item.id = id;
    item.example = sim.Synthesize(spec);
    // With a single shot the clue reuses the sample in the mixture.
    item.enrollments.push_back(k >= 2 ? sim.SampleEnrollment(target, r, shot)
                                      : pool.Get(target, 0));
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace tsex
