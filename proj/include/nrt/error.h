// nrt/error.h

// Copyright 2026  The noisy-rnnt Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NRT_ERROR_H_
#define NRT_ERROR_H_

#include <stdexcept>
#include <string>

namespace nrt {

// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
  kCheckpoint = 5,
  kState = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string &what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string &w) : Error(ErrorCategory::kConfig, w) {}
};

// Shape disagreement between operands. Counted as a configuration problem.
struct DimensionError : Error {
  explicit DimensionError(const std::string &w)
      : Error(ErrorCategory::kConfig, w) {}
};

struct DataError : Error {
  explicit DataError(const std::string &w) : Error(ErrorCategory::kData, w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string &w)
      : Error(ErrorCategory::kNumeric, w) {}
};

struct CheckpointError : Error {
  explicit CheckpointError(const std::string &w)
      : Error(ErrorCategory::kCheckpoint, w) {}
};

// Operation called in the wrong order (double perturbation, streaming
// segments out of order, shrinking pruning targets, ...).
struct StateError : Error {
  explicit StateError(const std::string &w) : Error(ErrorCategory::kState, w) {}
};

}  // namespace nrt

#endif  // NRT_ERROR_H_
