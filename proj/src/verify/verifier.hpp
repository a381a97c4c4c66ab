// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gateway/gateway.hpp"
#include "render/renderer.hpp"
#include "verify/leakage.hpp"

namespace ivr {

enum class FactualityResult { kPass, kFail, kUnverified };
enum class BlindResult { kKeep, kDiscard, kUnverified };
enum class FinalVerdict { kRetained, kRejectedLeakage, kRejectedFactuality, kRejectedBlindTest, kUnverified };

std::string_view to_string(FactualityResult r);
std::string_view to_string(BlindResult r);
std::string_view to_string(FinalVerdict v);

struct FactualityOutcome {
  FactualityResult result = FactualityResult::kUnverified;
  std::string reason;
};

struct BlindOutcome {
  BlindResult result = BlindResult::kUnverified;
  std::string examiner_answer;
};

/// Stage outcomes in order; a stage is absent when an earlier one stopped the sample.
struct VerificationTrail {
  std::string sample_id;
  LeakageResult leakage;
  std::optional<FactualityOutcome> factuality;
  std::optional<BlindOutcome> blind_test;
  FinalVerdict final_verdict = FinalVerdict::kUnverified;
};

json to_json(const VerificationTrail& t);
VerificationTrail trail_from_json(const json& j);

/// The generated image as the verifier sees it.
struct ImageBlob {
  std::string bytes;
  std::string sha256;
};

BackendRequest factuality_request(const Sample& s, RenderKind kind, const ImageBlob& image, const std::string& judge,
                                  std::int64_t seed);
/// Carries only x_mid and the question; the sample's original media are withheld.
BackendRequest blind_test_request(const Sample& s, const ImageBlob& image, const std::string& examiner,
                                  std::int64_t seed);

/// Judge reply {"verdict": "pass"|"fail", "reason": ...}. Transport failure or
/// a malformed reply yields kUnverified with a note.
FactualityOutcome factuality_check(const Sample& s, RenderKind kind, const ImageBlob& image, const std::string& judge,
                                   Gateway& gateway, std::int64_t seed);

/// Examiner answers from x_mid alone; graded with grade_attempt.
BlindOutcome blind_test(const Sample& s, const ImageBlob& image, const std::string& examiner, double tol,
                        Gateway& gateway, std::int64_t seed);

struct VerifierConfig {
  std::string judge;
  std::string examiner;
  double numeric_tolerance = 0.25;

  void validate() const;
};

/// Runs leakage lint, factuality check and blind test in order, stopping at
/// the first rejection.
VerificationTrail verify_sample(const Sample& s, const RenderRecord& render, const ImageBlob& image,
                                const VerifierConfig& cfg, Gateway& gateway, std::int64_t seed);

/// Per-corpus counters. Stage 1 is the pre-examination screen (zero-leakage
/// lint plus factuality check); stage 2 is the blind test.
struct StageCounts {
  std::size_t candidates = 0;
  std::size_t leakage_rejected = 0;
  std::size_t stage1_rejected = 0;  // includes leakage_rejected
  std::size_t stage2_rejected = 0;
  std::size_t retained = 0;
  std::size_t unverified_stage1 = 0;
  std::size_t unverified_stage2 = 0;

  std::size_t unverified() const { return unverified_stage1 + unverified_stage2; }
  std::size_t stage2_entrants() const { return candidates - stage1_rejected - unverified_stage1; }
  /// stage1_rejected over candidates that reached a stage-1 verdict.
  double stage1_rate() const;
  /// stage2_rejected over stage-2 entrants that reached a verdict.
  double stage2_rate() const;
  double retention() const;

  StageCounts& operator+=(const StageCounts& o);
  friend bool operator==(const StageCounts&, const StageCounts&) = default;
};

struct StageStats {
  std::map<std::string, StageCounts> per_corpus;
  StageCounts overall;

  void add(const std::string& corpus, const VerificationTrail& trail);
  void merge(const StageStats& other);
  /// Rates as percentages laid out like a rejection-rate table: one row per
  /// stage, one column per corpus; raw counters and fractions under "per_corpus".
  json to_json() const;
};

StageStats stage_statistics(const std::vector<std::pair<std::string, VerificationTrail>>& trails);

/// Retention implied by independent stage rejection rates.
inline double expected_retention(double stage1_rate, double stage2_rate) {
  return (1.0 - stage1_rate) * (1.0 - stage2_rate);
}

struct VerifiedSample {
  RenderedSample rendered;
  std::optional<VerificationTrail> trail;  // only for rendered candidates
};

json to_json(const VerifiedSample& v);
VerifiedSample verified_from_json(const json& j);

struct VerifyResult {
  std::vector<VerifiedSample> samples;
  StageStats stats;
};

/// Verifies every rendered candidate. Image files are resolved against
/// `rendered_dir`, the directory of the rendered manifest.
VerifyResult verify_corpus(const std::vector<RenderedSample>& rendered, const VerifierConfig& cfg, Gateway& gateway,
                           const std::filesystem::path& rendered_dir, std::int64_t seed, std::size_t workers);

}  // namespace ivr
