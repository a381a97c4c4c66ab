// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gateway/gateway.hpp"
#include "model/sample.hpp"

namespace ivr {

struct ProberVerdict {
  std::string prober_id;
  std::string raw_answer;
  bool correct = false;

  friend bool operator==(const ProberVerdict&, const ProberVerdict&) = default;
};

struct RouterConfig {
  std::vector<std::string> probers;
  int runs_per_prober = 1;
  // Visual path iff incorrect / attempts >= threshold_num / threshold_den.
  int threshold_num = 2;
  int threshold_den = 3;
  double numeric_tolerance = 0.25;

  std::size_t attempts() const { return probers.size() * static_cast<std::size_t>(runs_per_prober); }
  void validate() const;
};

enum class RoutePath { kTextPath, kVisualPath };
std::string_view to_string(RoutePath p);
RoutePath parse_route_path(std::string_view s);

struct RoutingDecision {
  std::string sample_id;
  RoutePath path = RoutePath::kTextPath;
  std::vector<ProberVerdict> verdicts;
};

json to_json(const RoutingDecision& d);
RoutingDecision routing_from_json(const std::string& sample_id, const json& j);

/// MC: exact label match after canonicalization. Numeric: relative error
/// |pred - gold| / max(|gold|, 1e-9) <= tol. Unparseable answers are wrong.
bool grade_attempt(std::string_view raw, const AnswerSpec& gold, double tol);

/// Pooled-attempt threshold rule. Throws kWrongAttemptCount when the verdict
/// count differs from probers x runs_per_prober.
RoutingDecision decide_route(std::string sample_id, std::vector<ProberVerdict> verdicts, const RouterConfig& cfg);

struct PathCounts {
  std::size_t total = 0;
  std::size_t visual = 0;
  std::size_t text = 0;
  std::size_t failed = 0;

  PathCounts& operator+=(const PathCounts& o);
  friend bool operator==(const PathCounts&, const PathCounts&) = default;
};

struct RoutingStats {
  PathCounts overall;
  std::map<std::string, PathCounts> per_corpus;

  void add(Corpus corpus, const std::optional<RoutePath>& path);
  void merge(const RoutingStats& other);
  json to_json() const;
  friend bool operator==(const RoutingStats&, const RoutingStats&) = default;
};

struct RoutedSample {
  Sample sample;
  std::optional<RoutingDecision> decision;  // empty when routing failed
  std::string failure;
};

json to_json(const RoutedSample& r);
RoutedSample routed_from_json(const json& j);

struct RouteResult {
  std::vector<RoutedSample> samples;  // input order
  RoutingStats stats;
};

BackendRequest prober_request(const Sample& s, const std::string& prober, int run, std::int64_t seed);

/// Probes every sample with every prober run through the gateway. A gateway
/// failure marks that sample routing_failed and leaves the others untouched.
RouteResult route_corpus(const std::vector<Sample>& manifest, const RouterConfig& cfg, Gateway& gateway,
                         std::int64_t seed, std::size_t workers);

}  // namespace ivr
