// Copyright 2026 The mechanism-lfd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mlfd/common/error.hpp"

namespace mlfd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kNotYawOnly: return "NotYawOnly";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kNotAttached: return "NotAttached";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kDegenerateTrajectory: return "DegenerateTrajectory";
    case ErrorCode::kTransitFailure: return "TransitFailure";
    case ErrorCode::kRestoreFailure: return "RestoreFailure";
    case ErrorCode::kNoDetection: return "NoDetection";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kSearchExhausted: return "SearchExhausted";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kBindError: return "BindError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace mlfd
