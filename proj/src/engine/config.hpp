// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "curation/backfill.hpp"
#include "eval/eval.hpp"
#include "gateway/gateway.hpp"
#include "numerics/kernels.hpp"
#include "render/renderer.hpp"
#include "router/router.hpp"
#include "verify/verifier.hpp"

namespace ivr {

struct BalanceConfig {
  double target_ratio = 0.4786;
};

/// Everything a pipeline run needs. Relative paths are resolved against
/// `base_dir`, the directory of the config file.
struct EngineConfig {
  std::filesystem::path base_dir;
  std::int64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency
  GatewayMode mode = GatewayMode::kReplay;
  std::filesystem::path cassette;
  RetryPolicy retry;
  std::map<std::string, BackendEndpoint> backends;
  RouterConfig router;
  RenderConfig renderer;
  VerifierConfig verifier;
  BackfillConfig backfill;
  BalanceConfig balance;
  ProtocolConfig protocol;
  JointLossConfig joint_loss;
  ScheduleConfig schedule;

  /// Throws kConfig for out-of-range values or references to unknown backends.
  void validate() const;
  std::size_t worker_count() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Parses a config document. Missing sections keep their defaults.
EngineConfig engine_config_from_json(const json& j, const std::filesystem::path& base_dir);
EngineConfig load_engine_config(const std::filesystem::path& path);
json to_json(const EngineConfig& cfg);

/// Builds the gateway described by the config: sim:// endpoints use the
/// simulated backend, anything else HTTP.
std::unique_ptr<Gateway> make_gateway(const EngineConfig& cfg);

}  // namespace ivr
