// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ivr {

// Mirrors ivr_status in the C header; values must stay in sync.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kConfig = 2,
  kIo = 3,
  kParse = 4,
  kUnparseable = 5,
  kReplayMiss = 6,
  kExhaustedRetries = 7,
  kDimMismatch = 8,
  kOutOfRange = 9,
  kEmpty = 10,
  kNotFound = 11,
  kConflict = 12,
  kWrongAttemptCount = 13,
  kUnknownCategory = 14,
  kLeakageUnavoidable = 15,
  kInconsistentChain = 16,
  kInsufficientPool = 17,
  kUnassignedCategory = 18,
  kEmptyValidRegion = 19,
  kMalformedResponse = 20,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ivr
