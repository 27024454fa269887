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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tsex/dataset.h"
#include "tsex/errors.h"
#include "tsex/simulator.h"
#include "tsex/wav_io.h"

namespace tsex {
namespace {

using testing::ThrownCategory;

std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fraction of energy inside [lo, hi] Hz by a direct DFT.
double BandEnergyFraction(const Vec& x, double lo, double hi) {
  const Eigen::Index n = x.size();
  double inside = 0.0, total = 0.0;
  for (Eigen::Index k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double a = 2.0 * M_PI * static_cast<double>(k * t % n) / n;
      re += x[t] * std::cos(a);
      im -= x[t] * std::sin(a);
    }
    const double p = re * re + im * im;
    const double hz = static_cast<double>(k) * kSampleRate / n;
    total += p;
    if (hz >= lo && hz <= hi) inside += p;
  }
  return inside / total;
}

class SimulatorTest : public ::testing::Test {
 protected:
  SimulatorTest() : bank_(ToyClassBank::Default()), config_(SimulatorConfig::Toy()) {
    vocab_ = Vocabulary(bank_.SeenNames());
    Rng rng(1);
    pool_ = BuildPool(bank_, vocab_, 6, config_, rng);
  }
  ToyClassBank bank_;
  SimulatorConfig config_;
  Vocabulary vocab_;
  SamplePool pool_;
};

TEST(ToyClassBankTest, EightSeenFourNewOnDisjointBands) {
  const ToyClassBank bank = ToyClassBank::Default();
  ASSERT_EQ(bank.classes().size(), 12u);
  EXPECT_EQ(bank.SeenNames().size(), 8u);
  EXPECT_EQ(bank.NewNames().size(), 4u);
  std::vector<double> centers;
  for (const auto& c : bank.classes()) centers.push_back(c.center_hz);
  std::sort(centers.begin(), centers.end());
  for (std::size_t i = 1; i < centers.size(); ++i) {
    EXPECT_GT(centers[i] - centers[i - 1], 2 * ToyClassBank::kHalfBandHz);
  }
  EXPECT_EQ(ThrownCategory([&] { bank.Find("no_such_class"); }),
            ErrorCategory::kVocabulary);
}

TEST(ToyClassBankTest, SamplesAreUnitRmsAndStayInTheirBand) {
  const ToyClassBank bank = ToyClassBank::Default();
  Rng rng(2);
  for (const auto& toy : bank.classes()) {
    const Vec x = bank.Synthesize(toy, 1600, rng);
    EXPECT_NEAR(std::sqrt(x.squaredNorm() / x.size()), 1.0, 1e-9) << toy.name;
    const double lo = toy.center_hz - ToyClassBank::kHalfBandHz - 40.0;
    const double hi = toy.center_hz + ToyClassBank::kHalfBandHz + 40.0;
    EXPECT_GT(BandEnergyFraction(x, lo, hi), 0.95) << toy.name;
  }
}

TEST_F(SimulatorTest, SpecDrawsDistinctClassesInsideTheScene) {
  SceneSimulator sim(config_, &pool_);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const SceneSpec spec = sim.SampleSpec(rng);
    ASSERT_EQ(spec.events.size(), 3u);
    std::set<int> classes;
    for (const auto& e : spec.events) {
      classes.insert(e.class_id);
      EXPECT_GE(e.onset_s, 0.0);
      EXPECT_LT(e.onset_s, spec.duration_s);
      EXPECT_LE(std::abs(e.gain_db), config_.gain_range_db);
    }
    EXPECT_EQ(classes.size(), 3u);
    EXPECT_GE(spec.snr_db, 15.0);
    EXPECT_LE(spec.snr_db, 25.0);
    ASSERT_EQ(spec.target.labels.size(), 1u);
    EXPECT_EQ(classes.count(spec.target.labels[0]) == 0, spec.target.inactive);
  }
}

TEST_F(SimulatorTest, InactiveShareConcentratesAroundConfiguredFraction) {
  SceneSimulator sim(config_, &pool_);
  Rng rng(4);
  int inactive = 0;
  for (int i = 0; i < 10000; ++i) inactive += sim.SampleSpec(rng).target.inactive;
  // Binomial(10000, 0.1) has standard deviation 30.
  EXPECT_GE(inactive, 800);
  EXPECT_LE(inactive, 1200);
}

TEST_F(SimulatorTest, SourceCountUniformOverConfiguredRange) {
  config_.min_sources = 3;
  config_.max_sources = 5;
  config_.max_targets = 2;
  config_.inactive_fraction = 0.0;
  SceneSimulator sim(config_, &pool_);
  Rng rng(5);
  std::map<std::size_t, int> counts;
  for (int i = 0; i < 3000; ++i) ++counts[sim.SampleSpec(rng).events.size()];
  ASSERT_EQ(counts.size(), 3u);
  for (auto [m, n] : counts) {
    EXPECT_GE(m, 3u);
    EXPECT_NEAR(n / 3000.0, 1.0 / 3.0, 0.04) << m;
  }
}

TEST_F(SimulatorTest, TooFewClassesIsAnError) {
  config_.min_sources = config_.max_sources = 9;
  SceneSimulator sim(config_, &pool_);
  Rng rng(6);
  EXPECT_EQ(ThrownCategory([&] { sim.SampleSpec(rng); }),
            ErrorCategory::kPrecondition);
}

TEST_F(SimulatorTest, MixtureIsSumOfStemsAndNoiseAtRequestedSnr) {
  SceneSimulator sim(config_, &pool_);
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const SceneSpec spec = sim.SampleSpec(rng);
    const MixtureExample ex = sim.Synthesize(spec);
    Vec events = Vec::Zero(static_cast<Eigen::Index>(ex.mixture.size()));
    for (const auto& [c, s] : ex.stems) events += s.samples();
    const Vec residual = ex.mixture.samples() - events - ex.noise.samples();
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-12);
    const double snr =
        10.0 * std::log10(events.squaredNorm() / ex.noise.Energy());
    EXPECT_NEAR(snr, spec.snr_db, 0.1);
  }
}

TEST_F(SimulatorTest, SameClassEventsShareOneStem) {
  SceneSimulator sim(config_, &pool_);
  Rng rng(8);
  SceneSpec spec;
  spec.duration_s = 1.0;
  spec.events = {sim.PlaceEvent(2, 0, rng), sim.PlaceEvent(2, 1, rng),
                 sim.PlaceEvent(5, 0, rng)};
  spec.target.labels = {2};
  const MixtureExample ex = sim.Synthesize(spec);
  EXPECT_EQ(ex.stems.size(), 2u);
  EXPECT_EQ(ex.active_classes, (std::set<int>{2, 5}));
}

TEST_F(SimulatorTest, EmptySceneIsNoiseOnly) {
  SceneSimulator sim(config_, &pool_);
  SceneSpec spec;
  spec.duration_s = 1.0;
  spec.noise_seed = 9;
  const MixtureExample ex = sim.Synthesize(spec);
  EXPECT_TRUE(ex.stems.empty());
  EXPECT_EQ(ex.mixture.samples(), ex.noise.samples());
  EXPECT_GT(ex.noise.Energy(), 0.0);
}

TEST_F(SimulatorTest, LoudScenesAreRescaledInsteadOfClipping) {
  SceneSimulator sim(config_, &pool_);
  Rng rng(10);
  SceneSpec spec;
  spec.duration_s = 1.0;
  for (int c = 0; c < 8; ++c) {
    EventSpec e = sim.PlaceEvent(c, 0, rng);
    e.gain_db = 24.0;
    spec.events.push_back(e);
  }
  const MixtureExample ex = sim.Synthesize(spec);
  EXPECT_LE(ex.mixture.samples().cwiseAbs().maxCoeff(), 1.0);
  Vec events = Vec::Zero(static_cast<Eigen::Index>(ex.mixture.size()));
  for (const auto& [c, s] : ex.stems) events += s.samples();
  EXPECT_LE((ex.mixture.samples() - events - ex.noise.samples()).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST_F(SimulatorTest, EnrollmentAvoidsTheExcludedSample) {
  SceneSimulator sim(config_, &pool_);
  Rng rng(11);
  SamplePool two;
  two.samples = {{Waveform(Vec::Constant(8, 0.1)), Waveform(Vec::Constant(8, 0.2))}};
  SceneSimulator small(config_, &two);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(small.SampleEnrollment(0, rng, 0).samples(), two.Get(0, 1).samples());
    EXPECT_EQ(small.SampleEnrollment(0, rng, 1).samples(), two.Get(0, 0).samples());
  }

  SamplePool ten;
  ten.samples.resize(1);
  for (int k = 0; k < 10; ++k) ten.samples[0].push_back(Waveform(Vec::Constant(4, k)));
  SceneSimulator sim10(config_, &ten);
  std::set<int> seen;
  for (int i = 0; i < 1000; ++i) {
    seen.insert(static_cast<int>(sim10.SampleEnrollment(0, rng, 4).samples()[0]));
  }
  EXPECT_EQ(seen.size(), 9u);
  EXPECT_EQ(seen.count(4), 0u);

  std::set<int> any;
  for (int i = 0; i < 1000; ++i) {
    any.insert(static_cast<int>(sim10.SampleEnrollment(0, rng, std::nullopt).samples()[0]));
  }
  EXPECT_EQ(any.size(), 10u);

  SamplePool one;
  one.samples = {{Waveform(Vec::Ones(4))}};
  SceneSimulator sim1(config_, &one);
  EXPECT_EQ(ThrownCategory([&] { sim1.SampleEnrollment(0, rng, 0); }),
            ErrorCategory::kPrecondition);
}

SimulatorConfig SmallConfig() {
  SimulatorConfig c = SimulatorConfig::Toy();
  c.num_train = 12;
  c.num_valid = 4;
  c.num_test = 4;
  c.pool_train_per_class = 4;
  c.pool_test_per_class = 3;
  c.seed = 21;
  return c;
}

TEST(GenerateDatasetTest, SeedDeterminesEverything) {
  const ToyClassBank bank = ToyClassBank::Default();
  const SimulatedDataset a = GenerateDataset(SmallConfig(), bank);
  const SimulatedDataset b = GenerateDataset(SmallConfig(), bank);
  SimulatorConfig other = SmallConfig();
  other.seed = 22;
  const SimulatedDataset c = GenerateDataset(other, bank);
  ASSERT_EQ(a.train.size(), 12u);
  EXPECT_EQ(a.valid.size(), 4u);
  EXPECT_EQ(a.test.size(), 4u);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].example.mixture.samples(), b.train[i].example.mixture.samples());
  }
  EXPECT_NE(a.train[0].example.mixture.samples(), c.train[0].example.mixture.samples());
}

TEST(GenerateDatasetTest, EnrollmentsDifferFromTheMixedSource) {
  const ToyClassBank bank = ToyClassBank::Default();
  const SimulatedDataset d = GenerateDataset(SmallConfig(), bank);
  for (const auto& ex : d.train) {
    ASSERT_EQ(ex.enrollments.size(), ex.example.target.labels.size());
    for (std::size_t j = 0; j < ex.enrollments.size(); ++j) {
      const int c = ex.example.target.labels[j];
      auto it = ex.example.stems.find(c);
      if (it == ex.example.stems.end()) continue;
      // The enrollment is a whole pool sample; it must not be the one that
      // was placed in the mixture.
      const Vec& enr = ex.enrollments[j].samples();
      const Vec& stem = it->second.samples();
      // Gain-invariant match: normalized correlation at every offset.
      bool found_in_stem = false;
      for (Eigen::Index s = 0; s + enr.size() <= stem.size() && !found_in_stem; ++s) {
        const auto seg = stem.segment(s, enr.size());
        const double denom = seg.norm() * enr.norm();
        found_in_stem = denom > 0.0 && std::abs(seg.dot(enr)) / denom > 0.999;
      }
      EXPECT_FALSE(found_in_stem) << ex.id;
    }
  }
}

TEST(GenerateDatasetTest, EveryClassBecomesATarget) {
  SimulatorConfig config = SmallConfig();
  config.num_train = 50 * 8;
  config.num_valid = config.num_test = 1;
  const SimulatedDataset d = GenerateDataset(config, ToyClassBank::Default());
  std::set<int> targets;
  for (const auto& ex : d.train) {
    for (int c : ex.example.target.labels) targets.insert(c);
  }
  EXPECT_EQ(targets.size(), 8u);
}

TEST(MaterializeDatasetTest, ReproducibleAndReloadable) {
  const SimulatorConfig config = SmallConfig();
  const ToyClassBank bank = ToyClassBank::Default();
  const auto dir_a = TempDir("tsex_sim_a");
  const auto dir_b = TempDir("tsex_sim_b");
  MaterializeDataset(GenerateDataset(config, bank), config, dir_a);
  MaterializeDataset(GenerateDataset(config, bank), config, dir_b);
  for (const char* split : {"train", "valid", "test"}) {
    const std::string name = std::string(split) + ".jsonl";
    EXPECT_EQ(Slurp(dir_a / name), Slurp(dir_b / name)) << split;
  }
  EXPECT_EQ(Slurp(dir_a / "train" / "train_000003_mix.wav"),
            Slurp(dir_b / "train" / "train_000003_mix.wav"));

  const Vocabulary vocab = Vocabulary::Load(dir_a / "vocabulary.txt");
  const auto train = LoadExamples(dir_a / "train.jsonl", vocab.size());
  EXPECT_EQ(train.size(), 12u);
  for (const auto& ex : train) {
    EXPECT_LE(ReconstructionError(ex.example), 1e-6) << ex.id;
    EXPECT_EQ(ex.enrollments.size(), ex.example.target.labels.size());
  }
  const SamplePool pool = LoadPool(dir_a / "pool" / "train", vocab);
  EXPECT_EQ(pool.num_classes(), 8);
  EXPECT_EQ(pool.Size(0), 4);
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST(AdaptationSetTest, TargetsCycleThroughNewClasses) {
  const ToyClassBank bank = ToyClassBank::Default();
  SimulatorConfig config = SmallConfig();
  Vocabulary vocab(bank.SeenNames());
  Rng rng(30);
  const SamplePool seen = BuildPool(bank, vocab, 3, config, rng);
  std::map<int, std::vector<Waveform>> shots;
  for (int id : {8, 9}) {
    for (int k = 0; k < 3; ++k) {
      shots[id].push_back(Waveform(
          config.event_rms * bank.Synthesize(bank.classes()[id], 4000, rng)));
    }
  }
  const auto set = GenerateAdaptationSet(shots, seen, config, rng, 6);
  ASSERT_EQ(set.size(), 6u);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& ex = set[i].example;
    EXPECT_EQ(ex.target.labels, (std::vector<int>{i % 2 == 0 ? 8 : 9}));
    EXPECT_FALSE(ex.target.inactive);
    EXPECT_EQ(ex.active_classes.size(), 3u);
    EXPECT_LE(ReconstructionError(ex), 1e-6);
  }
}

}  // namespace
}  // namespace tsex
