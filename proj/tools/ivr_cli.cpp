// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <json.hpp>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>

#include <pthread.h>

#include "ivr/ivr.h"

namespace {

bool g_json_errors = false;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

int exit_code(ivr_status s) {
  if (s == IVR_OK) return 0;
  return s == IVR_ERR_CONFIG ? 2 : 1;
}

int report(ivr_status s) {
  if (s == IVR_OK) return 0;
  const std::string name = ivr_status_name(s);
  const std::string msg = ivr_last_error();
  if (g_json_errors) {
    std::cerr << "{\"error\":\"" << escape(name) << "\",\"code\":" << static_cast<int>(s) << ",\"message\":\""
              << escape(msg) << "\",\"exit\":" << exit_code(s) << "}\n";
  } else {
    std::cerr << "error: " << name << ": " << msg << "\n";
  }
  return exit_code(s);
}

int emit(ivr_status s, char* text) {
  if (s == IVR_OK && text) std::cout << text << "\n";
  ivr_string_free(text);
  return report(s);
}

struct EngineFlags {
  std::string config;
  int workers = -1;
  long long seed = 0;
  bool seed_set = false;
  std::string mode;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& f) {
  cmd->add_option("--config", f.config, "engine config (JSON)")->required();
  cmd->add_option("--workers", f.workers, "worker threads, 0 = all cores");
  cmd->add_option_function<long long>(
      "--seed", [&f](const long long& v) { f.seed = v, f.seed_set = true; }, "override the config seed");
  cmd->add_option("--mode", f.mode, "gateway mode: live, record or replay");
}

ivr_status open_engine(const EngineFlags& f, ivr_engine** e) {
  ivr_status s = ivr_engine_open(f.config.c_str(), e);
  if (s != IVR_OK) return s;
  if (f.workers >= 0 && (s = ivr_engine_set_workers(*e, f.workers)) != IVR_OK) return s;
  if (f.seed_set && (s = ivr_engine_set_seed(*e, f.seed)) != IVR_OK) return s;
  if (!f.mode.empty() && (s = ivr_engine_set_mode(*e, f.mode.c_str())) != IVR_OK) return s;
  return IVR_OK;
}

template <class F>
int with_engine(const EngineFlags& flags, F&& f) {
  ivr_engine* e = nullptr;
  ivr_status s = open_engine(flags, &e);
  if (s != IVR_OK) {
    ivr_engine_close(e);
    return report(s);
  }
  char* out = nullptr;
  s = f(e, &out);
  ivr_engine_close(e);
  return emit(s, out);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int serve_review(const std::string& queue, const std::string& log, const std::string& host, int port,
                 const std::string& static_dir) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  ivr_review_server* srv = nullptr;
  const ivr_status s = ivr_review_serve_start(queue.c_str(), opt(log), host.c_str(), port, opt(static_dir), nullptr, &srv);
  if (s != IVR_OK) return report(s);
  std::cout << "review server listening on http://" << host << ":" << ivr_review_server_port(srv) << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  ivr_review_server_stop(srv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interleaved visual reasoning data engine"};
  app.require_subcommand(1);
  app.add_flag("--json-errors", g_json_errors, "print errors as JSON on stderr");

  std::function<int()> action;

  EngineFlags ef;
  std::string manifest, out, input, media_dir, queue, decisions, out_dir;

  auto* route = app.add_subcommand("route", "route samples to the visual or textual path");
  add_engine_flags(route, ef);
  route->add_option("--manifest", manifest)->required();
  route->add_option("--out", out)->required();
  route->callback([&] {
    action = [&] {
      return with_engine(ef, [&](ivr_engine* e, char** r) { return ivr_route(e, manifest.c_str(), out.c_str(), r); });
    };
  });

  auto* render = app.add_subcommand("render", "render x_mid for visual-path samples");
  add_engine_flags(render, ef);
  render->add_option("--routed", input)->required();
  render->add_option("--out", out)->required();
  render->add_option("--media-dir", media_dir, "directory that media URIs are relative to");
  render->callback([&] {
    action = [&] {
      return with_engine(ef, [&](ivr_engine* e, char** r) {
        return ivr_render(e, input.c_str(), out.c_str(), opt(media_dir), r);
      });
    };
  });

  auto* verify = app.add_subcommand("verify", "leakage lint, factuality check and blind test");
  add_engine_flags(verify, ef);
  verify->add_option("--rendered", input)->required();
  verify->add_option("--out", out)->required();
  verify->callback([&] {
    action = [&] {
      return with_engine(ef, [&](ivr_engine* e, char** r) { return ivr_verify(e, input.c_str(), out.c_str(), r); });
    };
  });

  auto* backfill = app.add_subcommand("backfill", "synthesize reasoning chains");
  add_engine_flags(backfill, ef);
  backfill->add_option("--verified", input)->required();
  backfill->add_option("--out", out)->required();
  backfill->callback([&] {
    action = [&] {
      return with_engine(ef, [&](ivr_engine* e, char** r) { return ivr_backfill(e, input.c_str(), out.c_str(), r); });
    };
  });

  auto* assemble = app.add_subcommand("assemble", "balance the mix and write the final dataset");
  add_engine_flags(assemble, ef);
  assemble->add_option("--tuples", input)->required();
  assemble->add_option("--out", out)->required();
  assemble->add_option("--queue", queue, "also write a review queue");
  assemble->add_option("--decisions", decisions, "review decision log; rejected items are dropped");
  assemble->callback([&] {
    action = [&] {
      return with_engine(ef, [&](ivr_engine* e, char** r) {
        return ivr_assemble(e, input.c_str(), out.c_str(), opt(queue), opt(decisions), r);
      });
    };
  });

  auto* pipeline = app.add_subcommand("pipeline", "run every stage into one directory");
  add_engine_flags(pipeline, ef);
  pipeline->add_option("--manifest", manifest)->required();
  pipeline->add_option("--out-dir", out_dir)->required();
  pipeline->add_option("--media-dir", media_dir);
  pipeline->callback([&] {
    action = [&] {
      return with_engine(ef, [&](ivr_engine* e, char** r) {
        return ivr_pipeline(e, manifest.c_str(), out_dir.c_str(), opt(media_dir), r);
      });
    };
  });

  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "composition statistics of a manifest");
  stats->add_option("--manifest", manifest)->required();
  stats->add_flag("--json", stats_json);
  stats->callback([&] {
    action = [&] {
      char* r = nullptr;
      const auto s = ivr_stats(manifest.c_str(), stats_json ? 0 : 1, &r);
      if (s == IVR_OK && r) std::cout << r;
      ivr_string_free(r);
      return report(s);
    };
  });

  std::string preds, gold, protocol = "spar", tiers, format = "json", eval_config;
  auto* eval = app.add_subcommand("eval", "score predictions");
  eval->add_option("--pred", preds)->required();
  eval->add_option("--gold", gold)->required();
  eval->add_option("--protocol", protocol)->check(CLI::IsMember({"vsi", "spar"}));
  eval->add_option("--tiers", tiers);
  eval->add_option("--out", out);
  eval->add_option("--format", format)->check(CLI::IsMember({"json", "markdown"}));
  eval->add_option("--config", eval_config, "engine config for protocol settings");
  eval->callback([&] {
    action = [&] {
      ivr_engine* e = nullptr;
      if (!eval_config.empty()) {
        const auto s = ivr_engine_open(eval_config.c_str(), &e);
        if (s != IVR_OK) return report(s);
      }
      char* r = nullptr;
      const auto s = ivr_eval(e, preds.c_str(), gold.c_str(), opt(tiers), protocol.c_str(), opt(out), format.c_str(), &r);
      ivr_engine_close(e);
      return emit(s, r);
    };
  });

  unsigned long long kseed = 20260101ULL;
  auto* kernels = app.add_subcommand("kernels", "numeric kernels");
  kernels->require_subcommand(1);
  auto* selfcheck = kernels->add_subcommand("selfcheck", "run the kernel property suite");
  selfcheck->add_option("--seed", kseed);
  selfcheck->callback([&] {
    action = [&] {
      char* r = nullptr;
      int pass = 0;
      const auto s = ivr_kernels_selfcheck(kseed, &r, &pass);
      if (s != IVR_OK) return report(s);
      const auto lines = nlohmann::json::parse(r);
      ivr_string_free(r);
      for (const auto& l : lines) {
        std::cout << (l.at("pass").get<bool>() ? "PASS " : "FAIL ") << l.at("name").get<std::string>() << "  "
                  << l.at("detail").get<std::string>() << "\n";
      }
      return pass ? 0 : 1;
    };
  });

  std::string host = "127.0.0.1", static_dir, log;
  int port = 8080;
  auto* review = app.add_subcommand("review", "human review");
  review->require_subcommand(1);
  auto* serve = review->add_subcommand("serve", "serve the review API");
  serve->add_option("--queue", queue)->required();
  serve->add_option("--log", log, "append-only decision log");
  serve->add_option("--port", port);
  serve->add_option("--host", host);
  serve->add_option("--static", static_dir, "directory of UI assets");
  serve->callback([&] { action = [&] { return serve_review(queue, log, host, port, static_dir); }; });

  std::size_t n_samples = 200;
  unsigned long long fseed = 7;
  auto* fixtures = app.add_subcommand("fixtures", "generate offline fixtures");
  fixtures->require_subcommand(1);
  auto* fx_comp = fixtures->add_subcommand("reference-composition", "composition manifest with the reference counts");
  fx_comp->add_option("--out", out)->required();
  fx_comp->callback([&] { action = [&] { return report(ivr_fixture_reference_composition(out.c_str())); }; });
  auto* fx_replay = fixtures->add_subcommand("replay", "synthetic corpus with recorded cassette");
  fx_replay->add_option("--dir", out_dir)->required();
  fx_replay->add_option("--samples", n_samples);
  fx_replay->add_option("--seed", fseed);
  fx_replay->callback([&] {
    action = [&] {
      char* r = nullptr;
      const auto s = ivr_fixture_replay(out_dir.c_str(), n_samples, fseed, &r);
      return emit(s, r);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (g_json_errors) {
      std::cerr << "{\"error\":\"Usage\",\"code\":2,\"message\":\"" << escape(e.what()) << "\",\"exit\":2}\n";
    } else {
      app.exit(e);
      std::cerr << app.help();
    }
    return 2;
  }
  return action ? action() : 2;
}
