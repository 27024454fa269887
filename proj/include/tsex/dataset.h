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

#ifndef TSEX_DATASET_H_
#define TSEX_DATASET_H_

#include <filesystem>
#include <string>
#include <vector>

#include "tsex/manifest.h"
#include "tsex/types.h"
#include "tsex/vocabulary.h"

namespace tsex {

// A mixture with its ground truth and one enrollment per target label.
struct TrainingExample {
  std::string id;
  MixtureExample example;
  std::vector<Waveform> enrollments;

  LabelSet TargetLabels() const { return LabelSet::Of(example.target.labels); }
  EnrollmentSet TargetEnrollments() const { return EnrollmentSet{enrollments}; }
};

// Writes mixture, noise, stems and enrollments under dir/<split>/ and the
// manifest to dir/<split>.jsonl; paths in the manifest are relative to dir.
Manifest WriteExamples(const std::vector<TrainingExample>& examples,
                       const std::filesystem::path& dir,
                       const std::string& split);

std::vector<TrainingExample> LoadExamples(const std::filesystem::path& manifest,
                                          int num_classes);

}  // namespace tsex

#endif  // TSEX_DATASET_H_
