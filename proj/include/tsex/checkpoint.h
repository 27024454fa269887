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

#ifndef TSEX_CHECKPOINT_H_
#define TSEX_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "tsex/nn.h"

namespace tsex {

// Single-file container: a JSON header (config, vocabulary, metadata and the
// array index) followed by raw little-endian float64 arrays. Arrays round-trip
// bit-exactly.
struct Checkpoint {
  nlohmann::json header = nlohmann::json::object();
  std::map<std::string, Mat> arrays;

  void Save(const std::filesystem::path& path) const;
  static Checkpoint Load(const std::filesystem::path& path);
};

void StoreParams(const ParamList& params, Checkpoint* checkpoint);
// Copies arrays into `params`; every parameter must be present with a
// matching shape.
void RestoreParams(const Checkpoint& checkpoint, const ParamList& params);

}  // namespace tsex

#endif  // TSEX_CHECKPOINT_H_
