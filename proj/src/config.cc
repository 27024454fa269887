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

#include "tsex/config.h"

#include <algorithm>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "tsex/errors.h"

namespace tsex {
namespace {

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "model.preset", "model.feature_dim", "model.frame_length", "model.hop",
      "model.bottleneck", "model.hidden", "model.kernel_size", "model.blocks",
      "model.mix_repeats", "model.tgt_repeats", "model.enrollment_blocks",
      "simulate.preset", "simulate.scene_duration_s", "simulate.event_min_s",
      "simulate.event_max_s", "simulate.min_sources", "simulate.max_sources",
      "simulate.min_targets", "simulate.max_targets", "simulate.snr_min_db",
      "simulate.snr_max_db", "simulate.gain_range_db",
      "simulate.inactive_fraction", "simulate.event_rms",
      "simulate.noise_smoothing", "simulate.num_train", "simulate.num_valid",
      "simulate.num_test", "simulate.pool_train_per_class",
      "simulate.pool_test_per_class", "simulate.classes", "simulate.seed",
      "loss.sdr_ceiling_db", "loss.inactive_floor", "loss.class_weight",
      "loss.inactive_fraction",
      "train.clue_mode", "train.max_epochs", "train.batch_size",
      "train.learning_rate", "train.clip_norm", "train.patience",
      "train.drop_inactive", "train.seed",
      "adapt.epochs", "adapt.learning_rate", "adapt.batch_size",
      "adapt.patience", "adapt.seed", "adapt.shots", "adapt.train_size",
      "adapt.valid_size", "adapt.test_size", "adapt.classes",
      "weak.iterations", "weak.batch_size", "weak.learning_rate",
      "weak.clip_norm", "weak.eval_every", "weak.seed",
      "classifier.epochs", "classifier.batch_size",
      "classifier.learning_rate", "classifier.seed", "classifier.channels",
      "data.root", "data.train", "data.valid", "data.test", "data.vocabulary",
  };
  return keys;
}

template <typename T>
T GetAs(const boost::property_tree::ptree& tree, const std::string& key,
        const T& fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  const auto value = tree.get_optional<T>(key);
  Require(value.has_value(), ErrorCategory::kConfig,
          "config key " + key + ": cannot parse '" + *node + "'");
  return *value;
}

}  // namespace

ConfigTree ConfigTree::Load(const std::filesystem::path& path) {
  ConfigTree config;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), config.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    Fail(std::filesystem::exists(path) ? ErrorCategory::kParse
                                       : ErrorCategory::kIo,
         e.what());
  }
  config.CheckKnownKeys();
  return config;
}

void ConfigTree::ApplyOverride(const std::string& assignment) {
  const auto eq = assignment.find('=');
  Require(eq != std::string::npos && eq > 0, ErrorCategory::kConfig,
          "override '" + assignment + "' is not of the form section.key=value");
  Set(boost::trim_copy(assignment.substr(0, eq)),
      boost::trim_copy(assignment.substr(eq + 1)));
}

void ConfigTree::Set(const std::string& key, const std::string& value) {
  Require(KnownKeys().count(key) > 0, ErrorCategory::kConfig,
          "unknown config key '" + key + "'");
  tree_.put(key, value);
}

bool ConfigTree::Has(const std::string& key) const {
  return tree_.get_optional<std::string>(key).has_value();
}

std::string ConfigTree::GetString(const std::string& key,
                                  const std::string& fallback) const {
  return tree_.get<std::string>(key, fallback);
}

int ConfigTree::GetInt(const std::string& key, int fallback) const {
  return GetAs<int>(tree_, key, fallback);
}

std::uint64_t ConfigTree::GetU64(const std::string& key,
                                std::uint64_t fallback) const {
  return GetAs<std::uint64_t>(tree_, key, fallback);
}

double ConfigTree::GetDouble(const std::string& key, double fallback) const {
  return GetAs<double>(tree_, key, fallback);
}

bool ConfigTree::GetBool(const std::string& key, bool fallback) const {
  if (!Has(key)) return fallback;
  const std::string v = boost::to_lower_copy(GetString(key, ""));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Fail(ErrorCategory::kConfig, "config key " + key + ": '" + v +
                                   "' is not a boolean");
}

void ConfigTree::CheckKnownKeys() const {
  for (const auto& [section, children] : tree_) {
    Require(!children.empty() || children.data().empty(), ErrorCategory::kConfig,
            "config key '" + section + "' lies outside any section");
    for (const auto& [key, value] : children) {
      const std::string full = section + "." + key;
      Require(KnownKeys().count(full) > 0, ErrorCategory::kConfig,
              "unknown config key '" + full + "'");
    }
  }
}

nlohmann::json ConfigTree::ToJson() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [section, children] : tree_) {
    for (const auto& [key, value] : children) {
      out[section][key] = value.data();
    }
  }
  return out;
}

ModelConfig ReadModelConfig(const ConfigTree& c) {
  const std::string preset = c.GetString("model.preset", "toy");
  ModelConfig m;
  if (preset == "toy") {
    m = ModelConfig::Toy();
  } else if (preset == "full") {
    m = ModelConfig::Full();
  } else {
    Fail(ErrorCategory::kConfig, "unknown model preset '" + preset + "'");
  }
  m.codec.feature_dim = c.GetInt("model.feature_dim", m.codec.feature_dim);
  m.extractor.feature_dim = m.codec.feature_dim;
  m.codec.frame_length = c.GetInt("model.frame_length", m.codec.frame_length);
  m.codec.hop = c.GetInt("model.hop", m.codec.hop);
  m.extractor.bottleneck = c.GetInt("model.bottleneck", m.extractor.bottleneck);
  m.extractor.hidden = c.GetInt("model.hidden", m.extractor.hidden);
  m.extractor.kernel_size = c.GetInt("model.kernel_size", m.extractor.kernel_size);
  m.extractor.blocks = c.GetInt("model.blocks", m.extractor.blocks);
  m.extractor.mix_repeats = c.GetInt("model.mix_repeats", m.extractor.mix_repeats);
  m.extractor.tgt_repeats = c.GetInt("model.tgt_repeats", m.extractor.tgt_repeats);
  m.enrollment_blocks = c.GetInt("model.enrollment_blocks", m.enrollment_blocks);
  m.Validate();
  return m;
}

SimulatorConfig ReadSimulatorConfig(const ConfigTree& c) {
  const std::string preset = c.GetString("simulate.preset", "toy");
  SimulatorConfig s;
  if (preset == "toy") {
    s = SimulatorConfig::Toy();
  } else if (preset == "full") {
    s = SimulatorConfig::Full();
  } else {
    Fail(ErrorCategory::kConfig, "unknown simulator preset '" + preset + "'");
  }
  s.scene_duration_s = c.GetDouble("simulate.scene_duration_s", s.scene_duration_s);
  s.event_min_s = c.GetDouble("simulate.event_min_s", s.event_min_s);
  s.event_max_s = c.GetDouble("simulate.event_max_s", s.event_max_s);
  s.min_sources = c.GetInt("simulate.min_sources", s.min_sources);
  s.max_sources = c.GetInt("simulate.max_sources", s.max_sources);
  s.min_targets = c.GetInt("simulate.min_targets", s.min_targets);
  s.max_targets = c.GetInt("simulate.max_targets", s.max_targets);
  s.snr_min_db = c.GetDouble("simulate.snr_min_db", s.snr_min_db);
  s.snr_max_db = c.GetDouble("simulate.snr_max_db", s.snr_max_db);
  s.gain_range_db = c.GetDouble("simulate.gain_range_db", s.gain_range_db);
  s.inactive_fraction =
      c.GetDouble("simulate.inactive_fraction", s.inactive_fraction);
  s.event_rms = c.GetDouble("simulate.event_rms", s.event_rms);
  s.noise_smoothing = c.GetDouble("simulate.noise_smoothing", s.noise_smoothing);
  s.num_train = c.GetInt("simulate.num_train", s.num_train);
  s.num_valid = c.GetInt("simulate.num_valid", s.num_valid);
  s.num_test = c.GetInt("simulate.num_test", s.num_test);
  s.pool_train_per_class =
      c.GetInt("simulate.pool_train_per_class", s.pool_train_per_class);
  s.pool_test_per_class =
      c.GetInt("simulate.pool_test_per_class", s.pool_test_per_class);
  s.seed = c.GetU64("simulate.seed", s.seed);
  const std::string classes = c.GetString("simulate.classes", "");
  if (!classes.empty()) {
    s.classes.clear();
    boost::split(s.classes, classes, boost::is_any_of(","));
    for (auto& name : s.classes) boost::trim(name);
  }
  s.Validate();
  return s;
}

LossConfig ReadLossConfig(const ConfigTree& c) {
  LossConfig l;
  l.sdr_ceiling_db = c.GetDouble("loss.sdr_ceiling_db", l.sdr_ceiling_db);
  l.inactive_floor = c.GetDouble("loss.inactive_floor", l.inactive_floor);
  l.class_weight = c.GetDouble("loss.class_weight", l.class_weight);
  l.inactive_fraction = c.GetDouble("loss.inactive_fraction", l.inactive_fraction);
  l.Validate();
  return l;
}

TrainConfig ReadTrainConfig(const ConfigTree& c) {
  TrainConfig t;
  t.clue_mode = ParseTrainClueMode(c.GetString("train.clue_mode", "class"));
  t.max_epochs = c.GetInt("train.max_epochs", t.max_epochs);
  t.batch_size = c.GetInt("train.batch_size", t.batch_size);
  t.learning_rate = c.GetDouble("train.learning_rate", t.learning_rate);
  t.clip_norm = c.GetDouble("train.clip_norm", t.clip_norm);
  t.patience = c.GetInt("train.patience", t.patience);
  t.drop_inactive = c.GetBool("train.drop_inactive", t.drop_inactive);
  t.seed = c.GetU64("train.seed", t.seed);
  t.loss = ReadLossConfig(c);
  Require(t.max_epochs >= 1 && t.batch_size >= 1 && t.learning_rate > 0.0,
          ErrorCategory::kConfig,
          "train: max_epochs, batch_size and learning_rate must be positive");
  return t;
}

AdaptConfig ReadAdaptConfig(const ConfigTree& c) {
  AdaptConfig a;
  a.epochs = c.GetInt("adapt.epochs", a.epochs);
  a.learning_rate = c.GetDouble("adapt.learning_rate", a.learning_rate);
  a.batch_size = c.GetInt("adapt.batch_size", a.batch_size);
  a.patience = c.GetInt("adapt.patience", a.patience);
  a.seed = c.GetU64("adapt.seed", a.seed);
  a.loss = ReadLossConfig(c);
  Require(a.epochs >= 1 && a.batch_size >= 1 && a.learning_rate > 0.0,
          ErrorCategory::kConfig,
          "adapt: epochs, batch_size and learning_rate must be positive");
  return a;
}

WeakRetrainConfig ReadWeakRetrainConfig(const ConfigTree& c) {
  WeakRetrainConfig w;
  w.iterations = c.GetInt("weak.iterations", w.iterations);
  w.batch_size = c.GetInt("weak.batch_size", w.batch_size);
  w.learning_rate = c.GetDouble("weak.learning_rate", w.learning_rate);
  w.clip_norm = c.GetDouble("weak.clip_norm", w.clip_norm);
  w.eval_every = c.GetInt("weak.eval_every", w.eval_every);
  w.seed = c.GetU64("weak.seed", w.seed);
  Require(w.iterations >= 0 && w.batch_size >= 1 && w.eval_every >= 1,
          ErrorCategory::kConfig, "weak: invalid iteration settings");
  return w;
}

ClassifierTrainConfig ReadClassifierTrainConfig(const ConfigTree& c) {
  ClassifierTrainConfig k;
  k.epochs = c.GetInt("classifier.epochs", k.epochs);
  k.batch_size = c.GetInt("classifier.batch_size", k.batch_size);
  k.learning_rate = c.GetDouble("classifier.learning_rate", k.learning_rate);
  k.seed = c.GetU64("classifier.seed", k.seed);
  Require(k.epochs >= 1 && k.batch_size >= 1 && k.learning_rate > 0.0,
          ErrorCategory::kConfig,
          "classifier: epochs, batch_size and learning_rate must be positive");
  return k;
}

}  // namespace tsex
