// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "ivr/ivr.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "common/error.hpp"
#include "curation/review.hpp"
#include "engine/config.hpp"
#include "engine/pipeline.hpp"
#include "eval/eval.hpp"
#include "numerics/kernels.hpp"
#include "sim/fixtures.hpp"

struct ivr_engine {
  ivr::EngineConfig cfg;
  std::unique_ptr<ivr::Gateway> gateway;

  ivr::Gateway& gw() {
    if (!gateway) gateway = ivr::make_gateway(cfg);
    return *gateway;
  }
};

struct ivr_review_server {
  std::unique_ptr<ivr::ReviewLog> log;
  std::unique_ptr<ivr::ReviewServer> server;
};

namespace {

thread_local std::string g_last_error;

template <class F>
ivr_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return IVR_OK;
  } catch (const ivr::Error& e) {
    g_last_error = e.what();
    return static_cast<ivr_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return IVR_ERR_PARSE;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return IVR_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IVR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return IVR_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

void need(const void* p, const char* what) {
  if (!p) ivr::fail(ivr::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

std::filesystem::path opt_path(const char* p) { return p ? std::filesystem::path(p) : std::filesystem::path(); }

}  // namespace

extern "C" {

const char* ivr_version(void) { return "0.1.0"; }

const char* ivr_last_error(void) { return g_last_error.c_str(); }

const char* ivr_status_name(ivr_status status) {
  return ivr::error_code_name(static_cast<ivr::ErrorCode>(status));
}

void ivr_string_free(char* s) { std::free(s); }

ivr_status ivr_engine_open(const char* config_path, ivr_engine** out) {
  return guarded([&] {
    need(config_path, "config_path");
    need(out, "out");
    auto e = std::make_unique<ivr_engine>();
    e->cfg = ivr::load_engine_config(config_path);
    *out = e.release();
  });
}

ivr_status ivr_engine_open_json(const char* config_json, const char* base_dir, ivr_engine** out) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out, "out");
    auto j = nlohmann::json::parse(config_json, nullptr, false);
    if (j.is_discarded()) ivr::fail(ivr::ErrorCode::kConfig, "config is not valid JSON");
    auto e = std::make_unique<ivr_engine>();
    e->cfg = ivr::engine_config_from_json(j, base_dir ? base_dir : ".");
    e->cfg.validate();
    *out = e.release();
  });
}

void ivr_engine_close(ivr_engine* engine) { delete engine; }

ivr_status ivr_engine_set_workers(ivr_engine* engine, int workers) {
  return guarded([&] {
    need(engine, "engine");
    if (workers < 0) ivr::fail(ivr::ErrorCode::kConfig, "workers must be >= 0");
    engine->cfg.workers = workers;
  });
}

ivr_status ivr_engine_set_seed(ivr_engine* engine, int64_t seed) {
  return guarded([&] {
    need(engine, "engine");
    engine->cfg.seed = seed;
  });
}

ivr_status ivr_engine_set_mode(ivr_engine* engine, const char* mode) {
  return guarded([&] {
    need(engine, "engine");
    need(mode, "mode");
    auto cfg = engine->cfg;
    try {
      cfg.mode = ivr::parse_gateway_mode(mode);
    } catch (const ivr::Error& e) {
      ivr::fail(ivr::ErrorCode::kConfig, e.what());
    }
    cfg.validate();
    engine->cfg = cfg;
    engine->gateway.reset();
  });
}

ivr_status ivr_engine_config(ivr_engine* engine, char** config_json) {
  return guarded([&] {
    need(engine, "engine");
    put(config_json, ivr::to_json(engine->cfg).dump(2));
  });
}

ivr_status ivr_route(ivr_engine* engine, const char* manifest, const char* out, char** summary) {
  return guarded([&] {
    need(engine, "engine");
    need(manifest, "manifest");
    need(out, "out");
    put(summary, ivr::run_route(engine->cfg, engine->gw(), manifest, out).dump());
  });
}

ivr_status ivr_render(ivr_engine* engine, const char* routed, const char* out, const char* media_dir,
                      char** summary) {
  return guarded([&] {
    need(engine, "engine");
    need(routed, "routed");
    need(out, "out");
    put(summary, ivr::run_render(engine->cfg, engine->gw(), routed, out, opt_path(media_dir)).dump());
  });
}

ivr_status ivr_verify(ivr_engine* engine, const char* rendered, const char* out, char** summary) {
  return guarded([&] {
    need(engine, "engine");
    need(rendered, "rendered");
    need(out, "out");
    put(summary, ivr::run_verify(engine->cfg, engine->gw(), rendered, out).dump());
  });
}

ivr_status ivr_backfill(ivr_engine* engine, const char* verified, const char* out, char** summary) {
  return guarded([&] {
    need(engine, "engine");
    need(verified, "verified");
    need(out, "out");
    put(summary, ivr::run_backfill(engine->cfg, engine->gw(), verified, out).dump());
  });
}

ivr_status ivr_assemble(ivr_engine* engine, const char* tuples, const char* out, const char* queue_out,
                        const char* decisions, char** summary) {
  return guarded([&] {
    need(engine, "engine");
    need(tuples, "tuples");
    need(out, "out");
    ivr::AssembleOptions opts{opt_path(queue_out), opt_path(decisions)};
    put(summary, ivr::run_assemble(engine->cfg, tuples, out, opts).dump());
  });
}

ivr_status ivr_pipeline(ivr_engine* engine, const char* manifest, const char* out_dir, const char* media_dir,
                        char** summary) {
  return guarded([&] {
    need(engine, "engine");
    need(manifest, "manifest");
    need(out_dir, "out_dir");
    put(summary, ivr::run_pipeline(engine->cfg, engine->gw(), manifest, out_dir, opt_path(media_dir)).dump());
  });
}

ivr_status ivr_stats(const char* manifest, int text, char** out) {
  return guarded([&] {
    need(manifest, "manifest");
    const auto s = ivr::run_stats(manifest);
    put(out, text ? ivr::stats_text(s) : s.dump());
  });
}

ivr_status ivr_eval(ivr_engine* engine, const char* preds, const char* gold, const char* tiers, const char* protocol,
                    const char* out, const char* format, char** report_json) {
  return guarded([&] {
    need(preds, "preds");
    need(gold, "gold");
    ivr::EngineConfig cfg;
    if (engine) cfg = engine->cfg;
    if (protocol) cfg.protocol.name = protocol;
    ivr::EvalInputs in{preds, gold, opt_path(tiers)};
    put(report_json, ivr::run_eval(cfg, in, opt_path(out), format ? format : "json").dump());
  });
}

ivr_status ivr_kernels_selfcheck(uint64_t seed, char** report_json, int* all_pass) {
  return guarded([&] {
    const auto lines = ivr::kernels_selfcheck(seed);
    nlohmann::json arr = nlohmann::json::array();
    bool pass = true;
    for (const auto& l : lines) {
      arr.push_back({{"name", l.name}, {"pass", l.pass}, {"detail", l.detail}});
      pass = pass && l.pass;
    }
    if (all_pass) *all_pass = pass ? 1 : 0;
    put(report_json, arr.dump());
  });
}

ivr_status ivr_shift_timestep(double u, double mu, int reciprocal, double* t) {
  return guarded([&] {
    need(t, "t");
    *t = ivr::shift_timestep(u, mu, reciprocal != 0);
  });
}

ivr_status ivr_lr_at(int64_t step, double peak_lr, double min_lr, int64_t total_steps, int64_t warmup_steps,
                     double* lr) {
  return guarded([&] {
    need(lr, "lr");
    *lr = ivr::lr_at(step, {peak_lr, min_lr, total_steps, warmup_steps});
  });
}

ivr_status ivr_mra(double pred, double gold, double* score) {
  return guarded([&] {
    need(score, "score");
    *score = ivr::mra(pred, gold);
  });
}

ivr_status ivr_flow_loss(const double* v_pred, const double* z0, const double* z1, size_t n, double* loss,
                         double* grad) {
  return guarded([&] {
    if (n) {
      need(v_pred, "v_pred");
      need(z0, "z0");
      need(z1, "z1");
    }
    need(loss, "loss");
    std::span<const double> v(v_pred, n), a(z0, n), b(z1, n);
    *loss = ivr::flow_loss(v, a, b);
    if (grad) {
      const auto g = ivr::flow_loss_grad(v, a, b);
      std::copy(g.begin(), g.end(), grad);
    }
  });
}

ivr_status ivr_hybrid_mask(const int* kinds, const size_t* lengths, size_t n_spans, uint8_t* out, size_t out_cells,
                           size_t* total) {
  return guarded([&] {
    if (n_spans) {
      need(kinds, "kinds");
      need(lengths, "lengths");
    }
    std::vector<ivr::TokenSpan> spans;
    for (size_t i = 0; i < n_spans; ++i) {
      if (kinds[i] != 0 && kinds[i] != 1) ivr::fail(ivr::ErrorCode::kInvalidArgument, "span kind must be 0 or 1");
      spans.push_back({kinds[i] == 1 ? ivr::SpanKind::kImage : ivr::SpanKind::kText, lengths[i]});
    }
    const auto m = ivr::build_hybrid_mask(spans);
    if (total) *total = m.size();
    if (m.size() * m.size() > out_cells) {
      ivr::fail(ivr::ErrorCode::kOutOfRange, "output buffer holds " + std::to_string(out_cells) + " cells, need " +
                                                 std::to_string(m.size() * m.size()));
    }
    if (m.size()) need(out, "out");
    for (size_t i = 0; i < m.size(); ++i) {
      for (size_t j = 0; j < m.size(); ++j) out[i * m.size() + j] = m.at(i, j) ? 1 : 0;
    }
  });
}

ivr_status ivr_fixture_reference_composition(const char* path) {
  return guarded([&] {
    need(path, "path");
    ivr::write_reference_composition(path);
  });
}

ivr_status ivr_fixture_replay(const char* dir, size_t n_samples, uint64_t seed, char** summary) {
  return guarded([&] {
    need(dir, "dir");
    put(summary, ivr::write_replay_fixture(dir, n_samples, seed).dump());
  });
}

ivr_status ivr_review_serve_start(const char* queue, const char* log, const char* host, int port,
                                  const char* static_dir, const char* token, ivr_review_server** out) {
  return guarded([&] {
    need(queue, "queue");
    need(out, "out");
    auto s = std::make_unique<ivr_review_server>();
    s->log = std::make_unique<ivr::ReviewLog>(ivr::ReviewLog::open(queue, opt_path(log)));
    ivr::ReviewServer::Options opts;
    if (host) opts.host = host;
    opts.port = port;
    opts.static_dir = opt_path(static_dir);
    if (token) {
      opts.bearer_token = token;
    } else if (const char* env = std::getenv(ivr::kReviewTokenEnv)) {
      opts.bearer_token = env;
    }
    s->server = std::make_unique<ivr::ReviewServer>(*s->log, opts);
    s->server->start();
    *out = s.release();
  });
}

int ivr_review_server_port(const ivr_review_server* server) { return server ? server->server->port() : -1; }

void ivr_review_server_stop(ivr_review_server* server) {
  if (!server) return;
  server->server->stop();
  delete server;
}

}  // extern "C"
