// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "gateway/gateway.hpp"
#include "model/sample.hpp"

namespace ivr {

/// Offline stand-in for every backend role. Replies are pure functions of the
/// request (backend, task, sample, run, seed) and a "world" manifest holding
/// gold answers, so recording through it is reproducible.
///
/// Per-backend `sim` parameters:
///   world               manifest path (relative to the config directory)
///   skill               prober accuracy scale in [0, 1], default 1
///   factuality_fail     {corpus: rate} judge rejection rates
///   blind_fail          {corpus: rate} examiner miss rates
///   inconsistency_rate  synthesizer wrong-answer rate
///   empty_plan_rate     synthesizer empty-plan rate
///   refusal_rate        any role
///   flaky_rate          share of requests whose first attempt fails
class SimTransport : public Transport {
 public:
  SimTransport(std::map<std::string, BackendEndpoint> endpoints, std::filesystem::path base_dir);
  BackendResponse send(const BackendRequest& req) override;

 private:
  const Sample* world_sample(const BackendEndpoint& ep, const std::string& id);

  std::map<std::string, BackendEndpoint> endpoints_;
  std::filesystem::path base_dir_;
  std::mutex mu_;
  std::map<std::string, std::map<std::string, Sample>> worlds_;  // world path -> id -> sample
  std::set<std::string> flaked_;
};

/// Default rejection rates per corpus for the simulated judge and examiner,
/// as fractions of candidates.
double default_factuality_fail(Corpus c);
double default_blind_fail(Corpus c);

/// Synthetic difficulty in [0, 1) of a sample, a pure function of its id.
double sim_difficulty(const std::string& sample_id);

}  // namespace ivr
