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

#ifndef TSEX_ERRORS_H_
#define TSEX_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsex {

// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  kParse,
  kVocabulary,
  kLength,
  kShape,
  kConfig,
  kIo,
  kDivergence,
  kPrecondition,
};

std::string_view CategoryName(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message);

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void Fail(ErrorCategory category, const std::string& message);

// Throws an Error of the given category unless `condition` holds.
inline void Require(bool condition, ErrorCategory category,
                    const std::string& message) {
  if (!condition) Fail(category, message);
}

}  // namespace tsex

#endif  // TSEX_ERRORS_H_
