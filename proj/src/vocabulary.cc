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

#include "tsex/vocabulary.h"

#include <algorithm>
#include <fstream>

#include "tsex/errors.h"

namespace tsex {

Vocabulary::Vocabulary(std::vector<std::string> names) {
  for (auto& name : names) Add(name);
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCategory::kIo, "cannot open " + path.string());
  Vocabulary vocabulary;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (!line.empty()) vocabulary.Add(line);
  }
  return vocabulary;
}

void Vocabulary::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  Require(out.good(), ErrorCategory::kIo, "cannot write " + path.string());
  for (const auto& name : names_) out << name << '\n';
}

const std::string& Vocabulary::Name(int id) const {
  Require(id >= 0 && id < size(), ErrorCategory::kVocabulary,
          "class id " + std::to_string(id) + " outside vocabulary of size " +
              std::to_string(size()));
  return names_[static_cast<std::size_t>(id)];
}

int Vocabulary::IndexOf(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  Require(it != names_.end(), ErrorCategory::kVocabulary,
          "unknown class '" + name + "'");
  return static_cast<int>(it - names_.begin());
}

bool Vocabulary::Contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

int Vocabulary::Add(const std::string& name) {
  Require(!name.empty(), ErrorCategory::kVocabulary, "empty class name");
  Require(!Contains(name), ErrorCategory::kVocabulary,
          "duplicate class '" + name + "'");
  names_.push_back(name);
  return size() - 1;
}

}  // namespace tsex
