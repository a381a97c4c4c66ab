// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "engine/config.hpp"
#include "curation/review.hpp"
#include "engine/pipeline.hpp"
#include "helpers.hpp"
#include "sim/fixtures.hpp"

using namespace ivr;
using ivr::test::TempDir;
using ivr::test::error_code_of;

namespace {

json minimal_config() {
  return {{"gateway", {{"mode", "replay"}, {"cassette", "c.jsonl"}}},
          {"backends", {{"p", {{"base_url", "sim://"}}}, {"g", {{"base_url", "sim://"}}}}},
          {"router", {{"probers", {"p"}}, {"runs_per_prober", 3}, {"threshold", {1, 2}}}},
          {"renderer", {{"generator", "g"}}},
          {"verifier", {{"judge", "g"}, {"examiner", "g"}}},
          {"backfill", {{"synthesizer", "g"}}}};
}

std::map<std::string, std::string> digest_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[e.path().lexically_relative(root).generic_string()] = read_file(e.path());
  }
  return out;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("minimal config parses and validates") {
    auto cfg = engine_config_from_json(minimal_config(), "/tmp/base");
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.mode == GatewayMode::kReplay);
    CHECK(cfg.resolve("c.jsonl") == fs::path("/tmp/base/c.jsonl"));
    CHECK(cfg.resolve("/abs/x") == fs::path("/abs/x"));
  }

  TEST_CASE("unknown backend reference is a config error") {
    auto j = minimal_config();
    j["renderer"]["generator"] = "nope";
    CHECK(error_code_of([&] { engine_config_from_json(j, ".").validate(); }) == ErrorCode::kConfig);
  }

  TEST_CASE("out-of-range values are config errors") {
    auto j = minimal_config();
    j["balance"] = {{"target_ratio", 1.5}};
    CHECK(error_code_of([&] { engine_config_from_json(j, ".").validate(); }) == ErrorCode::kConfig);
    j = minimal_config();
    j["workers"] = -1;
    CHECK(error_code_of([&] { engine_config_from_json(j, ".").validate(); }) == ErrorCode::kConfig);
    j = minimal_config();
    j["gateway"].erase("cassette");
    CHECK(error_code_of([&] { engine_config_from_json(j, ".").validate(); }) == ErrorCode::kConfig);
  }

  TEST_CASE("missing or malformed config file is a config error") {
    TempDir d("cfg");
    CHECK(error_code_of([&] { load_engine_config(d / "absent.json"); }) == ErrorCode::kConfig);
    write_file(d / "bad.json", "{ not json");
    CHECK(error_code_of([&] { load_engine_config(d / "bad.json"); }) == ErrorCode::kConfig);
  }

  TEST_CASE("config JSON round-trips") {
    auto cfg = engine_config_from_json(minimal_config(), ".");
    auto again = engine_config_from_json(to_json(cfg), ".");
    CHECK(to_json(again) == to_json(cfg));
  }

  TEST_CASE("rebase_uri") {
    CHECK(rebase_uri("media/a.png", "/d/in", "/d/out") == "../in/media/a.png");
    CHECK(rebase_uri("x.png", "/d", "/d") == "x.png");
    CHECK(rebase_uri("../m/x.png", "/d/a", "/d") == "m/x.png");
  }

  TEST_CASE("reference composition stats") {
    TempDir d("stats");
    write_reference_composition(d / "m.jsonl");
    const auto s = run_stats(d / "m.jsonl");
    const auto& c = s.at("composition");
    CHECK(c.at("total") == 31503);
    CHECK(c["axes"]["mode"]["Interleaved"]["count"] == 15077);
    CHECK(c["axes"]["mode"]["Interleaved"]["percent"].get<double>() == 47.86);
    CHECK(c["axes"]["mode"]["Textual"]["percent"].get<double>() == 52.14);
    const auto text = stats_text(s);
    CHECK(text.find("total 31503") != std::string::npos);
  }

  TEST_CASE("replay pipeline is deterministic across worker counts and does no I/O") {
    TempDir d("pipe");
    const auto summary = write_replay_fixture(d.path(), 60, 11);
    CHECK(summary.at("cassette_entries").get<std::size_t>() > 0);

    auto cfg = load_engine_config(d / "config.json");
    REQUIRE(cfg.mode == GatewayMode::kReplay);
    cfg.workers = 1;
    auto gw1 = make_gateway(cfg);
    const auto s1 = run_pipeline(cfg, *gw1, d / "manifest.jsonl", d / "run1", d.path());
    cfg.workers = 8;
    auto gw8 = make_gateway(cfg);
    const auto s8 = run_pipeline(cfg, *gw8, d / "manifest.jsonl", d / "run8", d.path());
    CHECK(gw1->transport_calls() == 0);
    CHECK(gw8->transport_calls() == 0);
    CHECK(s1.at("digests") == s8.at("digests"));
    CHECK(digest_tree(d / "run1") == digest_tree(d / "run8"));
  }

  TEST_CASE("assemble drops rejected items only") {
    TempDir d("asm");
    write_replay_fixture(d.path(), 40, 5);
    auto cfg = load_engine_config(d / "config.json");
    cfg.workers = 2;
    auto gw = make_gateway(cfg);
    run_pipeline(cfg, *gw, d / "manifest.jsonl", d / "run", d.path());
    const auto rows = read_jsonl(d / "run" / "dataset.jsonl");
    REQUIRE(rows.size() >= 3);
    const auto a = rows[0].at("sample_id").get<std::string>();
    const auto b = rows[1].at("sample_id").get<std::string>();
    write_jsonl(d / "decisions.jsonl",
                {to_json(ReviewDecision{a, ReviewStatus::kRejected, "r1", "bad chain", 1}),
                 to_json(ReviewDecision{b, ReviewStatus::kApproved, "r1", "", 1})});
    const auto s = run_assemble(cfg, d / "run" / "tuples.jsonl", d / "out.jsonl",
                                AssembleOptions{{}, d / "decisions.jsonl"});
    CHECK(s.at("decisions_applied") == 2);
    CHECK(s.at("exported").get<std::size_t>() == rows.size() - 1);
    for (const auto& r : read_jsonl(d / "out.jsonl")) CHECK(r.at("sample_id") != a);
  }
}
