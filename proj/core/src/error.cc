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

#include "legit/error.h"

namespace legit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kUnrenderable: return "Unrenderable";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kUnknownCodepoint: return "UnknownCodepoint";
    case ErrorCode::kMissingCodepoints: return "MissingCodepoints";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kMissingMetadata: return "MissingMetadata";
    case ErrorCode::kDegenerateMarginals: return "DegenerateMarginals";
    case ErrorCode::kWrongAnnotationCount: return "WrongAnnotationCount";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kVictimUnavailable: return "VictimUnavailable";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kDisqualified: return "Disqualified";
    case ErrorCode::kNoOpenRound: return "NoOpenRound";
    case ErrorCode::kNotReserved: return "NotReserved";
    case ErrorCode::kAlreadyLabeled: return "AlreadyLabeled";
    case ErrorCode::kRoundOpen: return "RoundOpen";
    case ErrorCode::kUnauthorized: return "Unauthorized";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace legit
