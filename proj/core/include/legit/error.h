// Copyright 2026 The LEGIT Toolkit Authors
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

#ifndef LEGIT_ERROR_H_
#define LEGIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace legit {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kFormatError,
  kUnrenderable,
  kZeroVector,
  kUnknownCodepoint,
  kMissingCodepoints,
  kDimensionMismatch,
  kMissingMetadata,
  kDegenerateMarginals,
  kWrongAnnotationCount,
  kNonFiniteLoss,
  kSingleClass,
  kVictimUnavailable,
  kSchemaMismatch,
  kDisqualified,
  kNoOpenRound,
  kNotReserved,
  kAlreadyLabeled,
  kRoundOpen,
  kUnauthorized,
  kNotFound,
};

// Stable machine-readable name, e.g. "Unrenderable".
std::string_view ErrorCodeName(ErrorCode code);

// Every domain failure in the library is reported as a legit::Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace legit

#endif  // LEGIT_ERROR_H_
