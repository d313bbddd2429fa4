// Copyright 2026 The MMPC Authors
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

#include "mmpc/error.h"

namespace mmpc {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroInverse: return "ZeroInverse";
    case ErrorCode::kNotInSpan: return "NotInSpan";
    case ErrorCode::kNotPrime: return "NotPrime";
    case ErrorCode::kEvenField: return "EvenField";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kBadDimensions: return "BadDimensions";
    case ErrorCode::kZeroRow: return "ZeroRow";
    case ErrorCode::kDuplicateRow: return "DuplicateRow";
    case ErrorCode::kDependentDemand: return "DependentDemand";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kBadParams: return "BadParams";
    case ErrorCode::kDonorExhausted: return "DonorExhausted";
    case ErrorCode::kIndexClash: return "IndexClash";
    case ErrorCode::kFieldTooSmall: return "FieldTooSmall";
    case ErrorCode::kRedundancyViolated: return "RedundancyViolated";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kMissingDonor: return "MissingDonor";
    case ErrorCode::kAlreadyDecoded: return "AlreadyDecoded";
    case ErrorCode::kTranscriptMismatch: return "TranscriptMismatch";
    case ErrorCode::kNoMapping: return "NoMapping";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kConfig: return "Config";
  }
  return "Unknown";
}

}  // namespace mmpc
