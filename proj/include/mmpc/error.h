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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmpc {

enum class ErrorCode {
  // gf
  kZeroInverse,
  kNotInSpan,
  kNotPrime,
  kEvenField,
  kDimensionMismatch,
  // model
  kBadDimensions,
  kZeroRow,
  kDuplicateRow,
  kDependentDemand,
  kLengthMismatch,
  // planner
  kBadParams,
  kDonorExhausted,
  kIndexClash,
  // coding
  kFieldTooSmall,
  kRedundancyViolated,
  // protocol
  kIndexOutOfRange,
  kSingularSystem,
  kMissingDonor,
  kAlreadyDecoded,
  kTranscriptMismatch,
  // audit
  kNoMapping,
  kInsufficientSamples,
  // io
  kConfig,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as this exception; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mmpc
