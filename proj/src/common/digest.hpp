// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ivr {

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// First 8 bytes of SHA-256, big-endian, as 16 lowercase hex digits.
std::string hash64_hex(std::string_view bytes);

/// First 8 bytes of SHA-256 as an integer; used to derive deterministic draws.
std::uint64_t hash64(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace ivr
