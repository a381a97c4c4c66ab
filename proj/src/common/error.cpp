// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "common/error.hpp"

namespace ivr {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kUnparseable: return "Unparseable";
    case ErrorCode::kReplayMiss: return "ReplayMiss";
    case ErrorCode::kExhaustedRetries: return "ExhaustedRetries";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kOutOfRange: return "StepOutOfRange";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kWrongAttemptCount: return "WrongAttemptCount";
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kLeakageUnavoidable: return "LeakageUnavoidable";
    case ErrorCode::kInconsistentChain: return "InconsistentChain";
    case ErrorCode::kInsufficientPool: return "InsufficientPool";
    case ErrorCode::kUnassignedCategory: return "UnassignedCategory";
    case ErrorCode::kEmptyValidRegion: return "EmptyValidRegion";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "Unknown";
}

}  // namespace ivr
