// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "engine/config.hpp"

namespace ivr {

namespace fs = std::filesystem;

/// Each stage reads one JSON-Lines file, writes one in input order and
/// returns a summary. Image URIs are rewritten relative to the output file's
/// directory.
json run_route(const EngineConfig& cfg, Gateway& gw, const fs::path& manifest, const fs::path& out);
/// `media_dir` resolves the samples' media URIs; empty means the directory of `routed`.
json run_render(const EngineConfig& cfg, Gateway& gw, const fs::path& routed, const fs::path& out,
                const fs::path& media_dir = {});
json run_verify(const EngineConfig& cfg, Gateway& gw, const fs::path& rendered, const fs::path& out);
json run_backfill(const EngineConfig& cfg, Gateway& gw, const fs::path& verified, const fs::path& out);

struct AssembleOptions {
  fs::path queue_out;  // optional review queue
  fs::path decisions;  // optional decision log; Rejected items are left out
};
json run_assemble(const EngineConfig& cfg, const fs::path& tuples, const fs::path& out,
                  const AssembleOptions& opts = {});

/// Composition of any manifest-like file, plus routing and stage statistics
/// when its lines carry them.
json run_stats(const fs::path& manifest);
/// Human-readable rendering of run_stats output.
std::string stats_text(const json& stats);

json run_eval(const EngineConfig& cfg, const EvalInputs& in, const fs::path& out, const std::string& format);

/// route -> render -> verify -> backfill -> assemble into `out_dir`.
/// The summary lists the SHA-256 of every file written.
json run_pipeline(const EngineConfig& cfg, Gateway& gw, const fs::path& manifest, const fs::path& out_dir,
                  const fs::path& media_dir = {});

/// Re-expresses `uri`, relative to `from_dir`, relative to `to_dir`.
std::string rebase_uri(const std::string& uri, const fs::path& from_dir, const fs::path& to_dir);

}  // namespace ivr
