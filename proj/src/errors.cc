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

#include "tsex/errors.h"

namespace tsex {

std::string_view CategoryName(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kVocabulary: return "vocabulary";
    case ErrorCategory::kLength: return "length";
    case ErrorCategory::kShape: return "shape";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kDivergence: return "divergence";
    case ErrorCategory::kPrecondition: return "precondition";
  }
  return "unknown";
}

Error::Error(ErrorCategory category, const std::string& message)
    : std::runtime_error(std::string(CategoryName(category)) + " error: " +
                         message),
      category_(category) {}

void Fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace tsex
