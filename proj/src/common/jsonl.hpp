// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ivr {

using json = nlohmann::json;

/// Reads a JSON-Lines file. Blank lines are skipped; a malformed line raises
/// kParse with its 1-based line number.
std::vector<json> read_jsonl(const std::filesystem::path& path);

/// Writes one compact JSON document per line, in order.
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Compact, key-sorted dump. nlohmann's object type is an ordered std::map and
/// floats are printed in shortest round-trip form, so this is canonical.
inline std::string canonical_dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::strict); }

}  // namespace ivr
