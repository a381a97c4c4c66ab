// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curation/record.hpp"
#include "gateway/gateway.hpp"
#include "verify/verifier.hpp"

namespace ivr {

struct BackfillConfig {
  std::string synthesizer;
  double numeric_tolerance = 0.25;
  bool structure_interleaved = true;  // also synthesize chains around retained x_mid

  void validate() const;
};

/// Gold answer in canonical display form ("B" or "3.5").
std::string gold_answer_text(const AnswerSpec& a);

BackendRequest textual_chain_request(const Sample& s, const std::string& synthesizer, std::int64_t seed);
BackendRequest interleaved_chain_request(const Sample& s, const RenderedImage& vis, const std::string& synthesizer,
                                         std::int64_t seed);

struct ChainParts {
  std::string plan;
  std::string deduct;
  std::string answer_text;
};

/// Parses a synthesizer reply {"plan", "deduct", "answer"?} and checks it.
/// Without "answer" the deduction text itself is graded. Throws
/// kMalformedResponse, kInvalidArgument (empty plan or deduction) or
/// kInconsistentChain (answer does not grade equal to gold).
ChainParts accept_chain(std::string_view body, const AnswerSpec& gold, double tol);

struct BackfillCounts {
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> count

  BackfillCounts& operator+=(const BackfillCounts& o);
};

struct BackfillStats {
  BackfillCounts textual;
  BackfillCounts interleaved;

  json to_json() const;
};

/// One accepted chain.
struct TupleLine {
  Sample sample;
  RecordMode mode = RecordMode::kTextual;
  ReasoningTuple tuple;
  std::optional<VerificationTrail> verification;
};

json to_json(const TupleLine& t);
TupleLine tuple_line_from_json(const json& j);

struct BackfillResult {
  std::vector<TupleLine> tuples;  // input order
  BackfillStats stats;
};

/// Synthesizes pure-text chains for TextPath samples and, when enabled,
/// structures chains around retained x_mid images. Rejected chains are
/// dropped and counted by reason.
BackfillResult backfill_corpus(const std::vector<VerifiedSample>& verified, const BackfillConfig& cfg,
                               Gateway& gateway, std::int64_t seed, std::size_t workers);

/// Pure-text tuples for the given TextPath candidates; candidates that are not
/// on the text path are rejected with kInvalidArgument.
BackfillResult backfill_textual(const std::vector<RoutedSample>& candidates, const BackfillConfig& cfg,
                                Gateway& gateway, std::int64_t seed, std::size_t workers);

}  // namespace ivr
