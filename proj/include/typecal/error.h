// Copyright 2026 The typecal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TYPECAL_ERROR_H_
#define TYPECAL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace typecal {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidConfig,
  kFormatError,
  kDuplicateType,
  kDuplicateSequence,
  kTokenOutOfRange,
  kEmptyType,
  kEmptyVocabulary,
  kMissingDistribution,
  kScorerUnavailable,
  kEmptyDevSet,
  kDegenerateBucket,
  kMissingBucket,
  kBudgetExceeded,
  kEmptyEvaluation,
  kMissingParams,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as Error; code() identifies the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // The message without the code-name prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace typecal

#endif  // TYPECAL_ERROR_H_
