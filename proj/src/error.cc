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

#include "typecal/error.h"

namespace typecal {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kDuplicateType: return "DuplicateType";
    case ErrorCode::kDuplicateSequence: return "DuplicateSequence";
    case ErrorCode::kTokenOutOfRange: return "TokenOutOfRange";
    case ErrorCode::kEmptyType: return "EmptyType";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kMissingDistribution: return "MissingDistribution";
    case ErrorCode::kScorerUnavailable: return "ScorerUnavailable";
    case ErrorCode::kEmptyDevSet: return "EmptyDevSet";
    case ErrorCode::kDegenerateBucket: return "DegenerateBucket";
    case ErrorCode::kMissingBucket: return "MissingBucket";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kEmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::kMissingParams: return "MissingParams";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace typecal
