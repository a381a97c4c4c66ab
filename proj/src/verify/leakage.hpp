// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "common/jsonl.hpp"
#include "model/sample.hpp"

namespace ivr {

enum class LeakageRule {
  kGoldString,      // gold answer string (>= 2 chars), case-insensitive, word-bounded
  kNumeral,         // standalone numeral equal to the numeric gold
  kAnswerIsLabel,   // "answer is <gold label>"
};

struct LeakageSpan {
  std::size_t text_index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  LeakageRule rule = LeakageRule::kGoldString;

  friend bool operator==(const LeakageSpan&, const LeakageSpan&) = default;
};

struct LeakageResult {
  bool pass = true;
  std::vector<LeakageSpan> spans;
};

/// Single-letter option labels only count in an explicit "answer is X" phrase,
/// since letters double as scene markers.
LeakageResult lint_zero_leakage(std::span<const std::string> texts, const AnswerSpec& gold);

json to_json(const LeakageResult& r);
LeakageResult leakage_from_json(const json& j);

}  // namespace ivr
