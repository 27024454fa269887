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

#ifndef TSEX_MANIFEST_H_
#define TSEX_MANIFEST_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tsex/types.h"

namespace tsex {

// One JSONL line. Paths are stored as written (relative paths resolve
// against the manifest's directory).
struct ManifestRecord {
  std::string id;
  std::string split;
  std::string mixture_path;
  std::string noise_path;
  std::map<int, std::string> stem_paths;
  std::vector<int> active_classes;
  TargetSpec target;
  // One enrollment per target label, in label order.
  std::vector<std::string> enrollment_paths;
  double snr_db = 0.0;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;

  std::filesystem::path Resolve(const std::string& path) const;
};

struct ManifestOptions {
  // Records must reference class ids below this bound; negative disables.
  int num_classes = -1;
  bool check_paths = true;
};

ManifestRecord ParseManifestLine(const std::string& line, int line_number);
std::string SerializeManifestRecord(const ManifestRecord& record);

Manifest LoadManifest(const std::filesystem::path& path,
                      const ManifestOptions& options = {});
void WriteManifest(const Manifest& manifest, const std::filesystem::path& path);

// Loads the audio a record points to.
MixtureExample LoadExample(const Manifest& manifest,
                           const ManifestRecord& record);

}  // namespace tsex

#endif  // TSEX_MANIFEST_H_
