// Copyright 2026 The CMR Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmr {

enum class ErrorCode {
  kLengthMismatch,
  kInvalidRecipe,
  kGapTooLarge,
  kDegenerateWindow,
  kEmptyVocabulary,
  kNoGroundClass,
  kEmptyInput,
  kEmptyText,
  kShapeMismatch,
  kOutOfBounds,
  kDimMismatch,
  kZeroVector,
  kNonFiniteLoss,
  kDuplicateId,
  kNormalizationFailure,
  kEmptyIndex,
  kCorruptFile,
  kVersionMismatch,
  kMissingLabel,
  kInvalidConfig,
  kParseError,
  kIo,
  kNotFound,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidRecipe: return "InvalidRecipe";
    case ErrorCode::kGapTooLarge: return "GapTooLarge";
    case ErrorCode::kDegenerateWindow: return "DegenerateWindow";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kNoGroundClass: return "NoGroundClass";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kNormalizationFailure: return "NormalizationFailure";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

/// All library failures surface as this exception; `code()` identifies the
/// failure class so callers (CLI, HTTP layer) can map it to exit codes or
/// status codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cmr
