// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>

#include "common/jsonl.hpp"

namespace ivr {

struct CompositionEntry {
  std::string mode;  // "Interleaved", "Textual" or "Unknown"
  std::string corpus;
  std::string task_category;
  std::string input_modality;
};

/// Accepts a dataset row, a tuple line, or a plain sample line; the mode
/// comes from "mode", else the routing path, else "Unknown".
CompositionEntry composition_entry_from_json(const json& j);

/// Source-domain grouping: SPAR alone, VSI and VLM-3R together.
std::string source_group(std::string_view corpus);

struct AxisBucket {
  std::size_t count = 0;
  double percent = 0.0;  // two decimals, rounded half-up
};

struct CompositionReport {
  std::size_t total = 0;
  // axis -> label -> bucket. Axes: mode, source, corpus, task_category, input_modality.
  std::map<std::string, std::map<std::string, AxisBucket>> axes;

  json to_json() const;
  std::string to_text() const;
};

/// count / total as a percentage rounded half-up to two decimals, computed in
/// integers so the rounding is exact.
double percent_half_up(std::size_t count, std::size_t total);

/// Throws kEmpty for an empty manifest.
CompositionReport composition_report(std::span<const CompositionEntry> entries);

}  // namespace ivr
