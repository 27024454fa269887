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

#ifndef TSEX_CONFIG_H_
#define TSEX_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "tsex/adaptation.h"
#include "tsex/classifier.h"
#include "tsex/model.h"
#include "tsex/simulator.h"
#include "tsex/training.h"
#include "tsex/weak_retrain.h"

namespace tsex {

// Sectioned key-value configuration ("section.key"), read from INI files
// and overridable one key at a time.
class ConfigTree {
 public:
  ConfigTree() = default;
  static ConfigTree Load(const std::filesystem::path& path);

  // "section.key=value"; later calls win.
  void ApplyOverride(const std::string& assignment);
  void Set(const std::string& key, const std::string& value);
  bool Has(const std::string& key) const;

  std::string GetString(const std::string& key, const std::string& fallback) const;
  int GetInt(const std::string& key, int fallback) const;
  std::uint64_t GetU64(const std::string& key, std::uint64_t fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;

  // Fails with a configuration error on any key outside the known set.
  void CheckKnownKeys() const;
  nlohmann::json ToJson() const;

 private:
  boost::property_tree::ptree tree_;
};

ModelConfig ReadModelConfig(const ConfigTree& config);
SimulatorConfig ReadSimulatorConfig(const ConfigTree& config);
LossConfig ReadLossConfig(const ConfigTree& config);
TrainConfig ReadTrainConfig(const ConfigTree& config);
AdaptConfig ReadAdaptConfig(const ConfigTree& config);
WeakRetrainConfig ReadWeakRetrainConfig(const ConfigTree& config);
ClassifierTrainConfig ReadClassifierTrainConfig(const ConfigTree& config);

}  // namespace tsex

#endif  // TSEX_CONFIG_H_
