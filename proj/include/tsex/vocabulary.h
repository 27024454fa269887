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

#ifndef TSEX_VOCABULARY_H_
#define TSEX_VOCABULARY_H_

#include <filesystem>
#include <string>
#include <vector>

namespace tsex {

// Ordered list of class names; a class id is its position.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> names);

  static Vocabulary Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& Name(int id) const;
  int IndexOf(const std::string& name) const;
  bool Contains(const std::string& name) const;

  // Appends a class and returns its id; duplicates are a vocabulary error.
  int Add(const std::string& name);

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> names_;
};

}  // namespace tsex

#endif  // TSEX_VOCABULARY_H_
