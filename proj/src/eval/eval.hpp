// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "common/jsonl.hpp"
#include "model/sample.hpp"

namespace ivr {

struct ProtocolConfig {
  std::string name = "spar";           // "vsi" or "spar"
  std::vector<double> mra_thresholds;  // empty selects 0.50, 0.55, ..., 0.95
  double mra_epsilon = 1e-9;           // comparison band around each threshold

  std::vector<double> thresholds() const;
  void validate() const;
};

/// Mean over thresholds of 1[|pred - gold| / |gold| < 1 - theta]. A zero gold
/// scores 1 only for an exact zero prediction.
double mra(double pred, double gold, const ProtocolConfig& cfg = {});

struct McTally {
  double accuracy = 0.0;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::vector<std::string> missing;  // ids with no prediction, counted wrong
};

/// Exact canonical-label match rate over gold ids.
McTally mc_accuracy(const std::map<std::string, std::string>& preds, const std::map<std::string, std::string>& golds);

/// Ordered tiers, e.g. {"Low", {"Depth-OC", ...}}.
using TierMap = std::vector<std::pair<std::string, std::vector<std::string>>>;

TierMap spar_default_tiers();

/// Paired subtasks map to a shared reduced category and are averaged with
/// equal weight; unpaired subtasks pass through under their own name.
std::map<std::string, double> reduce_dimensions(const std::map<std::string, double>& scores,
                                                const std::map<std::string, std::string>& pairing);

/// Unweighted mean per tier, in tier order, over tiers that have scored
/// members. Throws kUnassignedCategory when a scored category has no tier.
std::vector<std::pair<std::string, double>> tier_average(const std::map<std::string, double>& category_scores,
                                                         const TierMap& tiers);

struct CategoryScore {
  std::string name;
  std::string tier;  // empty when the protocol has no tiers
  double score = 0.0;

  friend bool operator==(const CategoryScore&, const CategoryScore&) = default;
};

struct EvalReport {
  std::string protocol;
  std::map<std::string, double> subtask_scores;
  std::vector<CategoryScore> categories;  // reduced, in tier order
  std::vector<std::pair<std::string, double>> tiers;
  double overall_per_subtask = 0.0;
  double overall_per_reduced_category = 0.0;
  std::size_t samples = 0;
  std::size_t missing = 0;
  std::size_t unparseable = 0;
  std::vector<std::string> flags;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Builds a report from subtask scores (percent). Throws kEmpty when there is
/// no category.
EvalReport build_report(const std::string& protocol, const std::map<std::string, double>& subtask_scores,
                        const std::map<std::string, std::string>& pairing, const TierMap& tiers);

json report_to_json(const EvalReport& r);
EvalReport report_from_json(const json& j);
/// Table-shaped markdown: a header row per tier followed by its categories.
/// Throws kEmpty for a report without categories.
std::string report_to_markdown(const EvalReport& r);

/// Two-decimal display with half-up rounding of the decimal representation.
std::string format_score(double v);

struct EvalInputs {
  std::filesystem::path preds;
  std::filesystem::path gold;
  std::filesystem::path tiers;  // optional: {"tiers": {...} | [[name, [...]], ...], "pairing": {...}}
};

/// Scores prediction lines {sample_id, answer|raw} against a gold manifest.
/// Subtask = the gold sample's task_category.
EvalReport evaluate_files(const EvalInputs& in, const ProtocolConfig& cfg);

}  // namespace ivr
