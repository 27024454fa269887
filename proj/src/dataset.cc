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

#include "tsex/dataset.h"

#include "tsex/errors.h"
#include "tsex/wav_io.h"

namespace tsex {

Manifest WriteExamples(const std::vector<TrainingExample>& examples,
                       const std::filesystem::path& dir,
                       const std::string& split) {
  Manifest manifest;
  manifest.base_dir = dir;
  for (const auto& item : examples) {
    const MixtureExample& ex = item.example;
    const std::string stem_base = split + "/" + item.id;
    ManifestRecord r;
    r.id = item.id;
    r.split = split;
    r.mixture_path = stem_base + "_mix.wav";
    r.noise_path = stem_base + "_noise.wav";
    WriteWav(dir / r.mixture_path, ex.mixture);
    WriteWav(dir / r.noise_path, ex.noise);
    for (const auto& [id, stem] : ex.stems) {
      r.stem_paths[id] = stem_base + "_src" + std::to_string(id) + ".wav";
      WriteWav(dir / r.stem_paths[id], stem);
    }
    for (std::size_t k = 0; k < item.enrollments.size(); ++k) {
      r.enrollment_paths.push_back(stem_base + "_enr" + std::to_string(k) +
                                   ".wav");
      WriteWav(dir / r.enrollment_paths.back(), item.enrollments[k]);
    }
    r.active_classes.assign(ex.active_classes.begin(), ex.active_classes.end());
    r.target = ex.target;
    r.snr_db = ex.snr_db;
    manifest.records.push_back(std::move(r));
  }
  WriteManifest(manifest, dir / (split + ".jsonl"));
  return manifest;
}

std::vector<TrainingExample> LoadExamples(const std::filesystem::path& path,
                                          int num_classes) {
  ManifestOptions options;
  options.num_classes = num_classes;
  const Manifest manifest = LoadManifest(path, options);
  std::vector<TrainingExample> out;
  out.reserve(manifest.records.size());
  for (const auto& r : manifest.records) {
    TrainingExample item;
    item.id = r.id;
    item.example = LoadExample(manifest, r);
    for (const auto& p : r.enrollment_paths) {
      item.enrollments.push_back(ReadWav(manifest.Resolve(p)));
    }
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace tsex
