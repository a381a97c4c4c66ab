// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "engine/config.hpp"

#include <thread>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "sim/sim.hpp"

namespace ivr {
namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config field '") + key + "': " + e.what());
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) fail(ErrorCode::kConfig, std::string("config section '") + key + "' must be an object");
  return j.at(key);
}

KeyframeStrategy parse_strategy(const std::string& s) {
  if (s == "uniform" || s == "Uniform") return KeyframeStrategy::kUniform;
  if (s == "model" || s == "model_driven" || s == "ModelDriven") return KeyframeStrategy::kModelDriven;
  fail(ErrorCode::kConfig, "unknown keyframe strategy '" + s + "'");
}

void require_backend(const EngineConfig& cfg, const std::string& id, const char* where) {
  if (id.empty()) fail(ErrorCode::kConfig, std::string(where) + " must name a backend");
  if (!cfg.backends.count(id)) fail(ErrorCode::kConfig, std::string(where) + " references unknown backend '" + id + "'");
}

}  // namespace

void EngineConfig::validate() const {
  retry.validate();
  try {
    router.validate();
    renderer.validate();
    verifier.validate();
    backfill.validate();
    protocol.validate();
    joint_loss.validate();
    schedule.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    fail(ErrorCode::kConfig, e.what());
  }
  for (const auto& p : router.probers) require_backend(*this, p, "router.probers");
  require_backend(*this, renderer.generator, "renderer.generator");
  if (renderer.keyframe_strategy == KeyframeStrategy::kModelDriven) {
    require_backend(*this, renderer.keyframe_backend, "renderer.keyframe_backend");
  }
  require_backend(*this, verifier.judge, "verifier.judge");
  require_backend(*this, verifier.examiner, "verifier.examiner");
  require_backend(*this, backfill.synthesizer, "backfill.synthesizer");
  if (!(balance.target_ratio > 0.0 && balance.target_ratio < 1.0)) {
    fail(ErrorCode::kConfig, "balance.target_ratio must lie in (0, 1)");
  }
  if (workers < 0) fail(ErrorCode::kConfig, "workers must be >= 0");
  if (mode != GatewayMode::kLive && cassette.empty()) fail(ErrorCode::kConfig, "record/replay mode needs gateway.cassette");
}

std::size_t EngineConfig::worker_count() const { return resolve_workers(workers); }

std::filesystem::path EngineConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

EngineConfig engine_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) fail(ErrorCode::kConfig, "config must be a JSON object");
  EngineConfig c;
  c.base_dir = base_dir;
  read(j, "seed", c.seed);
  read(j, "workers", c.workers);

  const json& gw = section(j, "gateway");
  std::string mode = "replay";
  read(gw, "mode", mode);
  try {
    c.mode = parse_gateway_mode(mode);
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  std::string cassette;
  read(gw, "cassette", cassette);
  c.cassette = cassette;

  const json& retry = section(j, "retry");
  read(retry, "max_attempts", c.retry.max_attempts);
  std::int64_t delay = c.retry.base_delay.count();
  read(retry, "base_delay_ms", delay);
  c.retry.base_delay = std::chrono::milliseconds(delay);
  read(retry, "multiplier", c.retry.multiplier);
  read(retry, "max_in_flight", c.retry.max_in_flight);

  for (const auto& [id, b] : section(j, "backends").items()) {
    BackendEndpoint ep;
    ep.id = id;
    read(b, "base_url", ep.base_url);
    read(b, "headers", ep.headers);
    read(b, "timeout_ms", ep.timeout_ms);
    if (b.contains("sim")) ep.sim = b.at("sim");
    if (ep.base_url.empty()) fail(ErrorCode::kConfig, "backend '" + id + "' needs base_url");
    c.backends[id] = std::move(ep);
  }

  const json& router = section(j, "router");
  read(router, "probers", c.router.probers);
  read(router, "runs_per_prober", c.router.runs_per_prober);
  if (router.contains("threshold")) {
    std::vector<int> t;
    read(router, "threshold", t);
    if (t.size() != 2) fail(ErrorCode::kConfig, "router.threshold must be [numerator, denominator]");
    c.router.threshold_num = t[0];
    c.router.threshold_den = t[1];
  }
  read(router, "numeric_tolerance", c.router.numeric_tolerance);

  const json& render = section(j, "renderer");
  read(render, "generator", c.renderer.generator);
  read(render, "keyframe_budget", c.renderer.keyframe_budget);
  read(render, "keyframe_backend", c.renderer.keyframe_backend);
  if (render.contains("keyframe_strategy")) {
    c.renderer.keyframe_strategy = parse_strategy(render.at("keyframe_strategy").get<std::string>());
  }
  for (const auto& [cat, kind] : section(render, "taxonomy").items()) {
    try {
      c.renderer.taxonomy[cat] = parse_render_kind(kind.get<std::string>());
    } catch (const std::exception& e) {
      fail(ErrorCode::kConfig, "renderer.taxonomy." + cat + ": " + e.what());
    }
  }
  const json& tpl = section(render, "templates");
  read(tpl, "bev", c.renderer.templates.bev);
  read(tpl, "pov", c.renderer.templates.pov);
  read(tpl, "marker_clause", c.renderer.templates.marker_clause);
  read(tpl, "no_text_clause", c.renderer.templates.no_text_clause);

  const json& verify = section(j, "verifier");
  read(verify, "judge", c.verifier.judge);
  read(verify, "examiner", c.verifier.examiner);
  read(verify, "numeric_tolerance", c.verifier.numeric_tolerance);

  const json& backfill = section(j, "backfill");
  read(backfill, "synthesizer", c.backfill.synthesizer);
  read(backfill, "numeric_tolerance", c.backfill.numeric_tolerance);
  read(backfill, "structure_interleaved", c.backfill.structure_interleaved);

  read(section(j, "balance"), "target_ratio", c.balance.target_ratio);

  const json& proto = section(j, "protocol");
  read(proto, "name", c.protocol.name);
  read(proto, "mra_thresholds", c.protocol.mra_thresholds);
  read(proto, "mra_epsilon", c.protocol.mra_epsilon);

  const json& kernels = section(j, "kernels");
  read(kernels, "lambda_text", c.joint_loss.lambda_text);
  read(kernels, "lambda_img", c.joint_loss.lambda_img);
  read(kernels, "mu", c.joint_loss.mu);
  read(kernels, "dropout_p", c.joint_loss.dropout_p);
  read(kernels, "ema_decay", c.joint_loss.ema_decay);
  read(kernels, "reciprocal_shift", c.joint_loss.reciprocal_shift);
  const json& sched = section(kernels, "schedule");
  read(sched, "peak_lr", c.schedule.peak_lr);
  read(sched, "min_lr", c.schedule.min_lr);
  read(sched, "total_steps", c.schedule.total_steps);
  read(sched, "warmup_steps", c.schedule.warmup_steps);
  return c;
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kConfig, "config is not valid JSON: " + path.string());
  auto cfg = engine_config_from_json(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  cfg.validate();
  return cfg;
}

json to_json(const EngineConfig& c) {
  json backends = json::object();
  for (const auto& [id, b] : c.backends) {
    backends[id] = {{"base_url", b.base_url}, {"headers", b.headers}, {"timeout_ms", b.timeout_ms}};
    if (!b.sim.empty()) backends[id]["sim"] = b.sim;
  }
  json taxonomy = json::object();
  for (const auto& [cat, kind] : c.renderer.taxonomy) taxonomy[cat] = to_string(kind);
  return {
      {"seed", c.seed},
      {"workers", c.workers},
      {"gateway", {{"mode", c.mode == GatewayMode::kLive ? "live" : c.mode == GatewayMode::kRecord ? "record" : "replay"},
                   {"cassette", c.cassette.generic_string()}}},
      {"retry", {{"max_attempts", c.retry.max_attempts},
                 {"base_delay_ms", c.retry.base_delay.count()},
                 {"multiplier", c.retry.multiplier},
                 {"max_in_flight", c.retry.max_in_flight}}},
      {"backends", backends},
      {"router", {{"probers", c.router.probers},
                  {"runs_per_prober", c.router.runs_per_prober},
                  {"threshold", {c.router.threshold_num, c.router.threshold_den}},
                  {"numeric_tolerance", c.router.numeric_tolerance}}},
      {"renderer", {{"generator", c.renderer.generator},
                    {"keyframe_budget", c.renderer.keyframe_budget},
                    {"keyframe_strategy",
                     c.renderer.keyframe_strategy == KeyframeStrategy::kUniform ? "uniform" : "model_driven"},
                    {"keyframe_backend", c.renderer.keyframe_backend},
                    {"taxonomy", taxonomy}}},
      {"verifier", {{"judge", c.verifier.judge},
                    {"examiner", c.verifier.examiner},
                    {"numeric_tolerance", c.verifier.numeric_tolerance}}},
      {"backfill", {{"synthesizer", c.backfill.synthesizer},
                    {"numeric_tolerance", c.backfill.numeric_tolerance},
                    {"structure_interleaved", c.backfill.structure_interleaved}}},
      {"balance", {{"target_ratio", c.balance.target_ratio}}},
      {"protocol", {{"name", c.protocol.name}, {"mra_thresholds", c.protocol.thresholds()}, {"mra_epsilon", c.protocol.mra_epsilon}}},
      {"kernels", {{"lambda_text", c.joint_loss.lambda_text},
                   {"lambda_img", c.joint_loss.lambda_img},
                   {"mu", c.joint_loss.mu},
                   {"dropout_p", c.joint_loss.dropout_p},
                   {"ema_decay", c.joint_loss.ema_decay},
                   {"reciprocal_shift", c.joint_loss.reciprocal_shift},
                   {"schedule", {{"peak_lr", c.schedule.peak_lr},
                                 {"min_lr", c.schedule.min_lr},
                                 {"total_steps", c.schedule.total_steps},
                                 {"warmup_steps", c.schedule.warmup_steps}}}}},
  };
}

std::unique_ptr<Gateway> make_gateway(const EngineConfig& cfg) {
  auto routing = std::make_shared<RoutingTransport>();
  std::map<std::string, BackendEndpoint> http;
  std::map<std::string, BackendEndpoint> sim;
  for (const auto& [id, ep] : cfg.backends) {
    (ep.base_url.rfind("sim://", 0) == 0 ? sim : http)[id] = ep;
  }
  if (!http.empty()) {
    auto t = std::make_shared<HttpTransport>(http);
    for (const auto& [id, _] : http) routing->add(id, t);
  }
  if (!sim.empty()) {
    auto t = std::make_shared<SimTransport>(sim, cfg.base_dir);
    for (const auto& [id, _] : sim) routing->add(id, t);
  }
  std::shared_ptr<Cassette> cassette;
  if (cfg.mode == GatewayMode::kReplay) {
    cassette = Cassette::load(cfg.resolve(cfg.cassette));
  } else if (cfg.mode == GatewayMode::kRecord) {
    cassette = Cassette::open_for_record(cfg.resolve(cfg.cassette));
  }
  return std::make_unique<Gateway>(cfg.mode, cfg.retry, routing, cassette);
}

}  // namespace ivr
