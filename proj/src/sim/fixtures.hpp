// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "common/jsonl.hpp"

namespace ivr {

/// Composition-only manifest with the reference dataset counts: 31,503 rows,
/// 15,077 interleaved, 15,189 from SPAR.
void write_reference_composition(const std::filesystem::path& path);

/// Synthetic corpus plus everything needed to replay the pipeline offline:
/// manifest.jsonl, media/ (16-bit depth PNGs), config.record.json (simulated
/// backends), cassette.jsonl recorded through them, and config.json (replay
/// only; its HTTP endpoints are never contacted). Returns the record summary.
json write_replay_fixture(const std::filesystem::path& dir, std::size_t n_samples, std::uint64_t seed);

}  // namespace ivr
