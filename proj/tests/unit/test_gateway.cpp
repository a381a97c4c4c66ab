// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>

#include "common/digest.hpp"
#include "common/parallel.hpp"
#include "doctest.h"
#include "gateway/gateway.hpp"
#include "helpers.hpp"
#include "httplib.h"

using namespace ivr;
using ivr::test::error_code_of;

namespace {

BackendRequest request(json payload, std::int64_t seed = 1, std::string backend = "judge") {
  return {std::move(backend), OpKind::kJudge, std::move(payload), seed};
}

}  // namespace

TEST_SUITE("gateway") {
  TEST_CASE("key order does not change the request hash") {
    const auto a = request(json::parse(R"({"query":"q","media":[{"uri":"x","w":1}],"task":"answer"})"));
    const auto b = request(json::parse(R"({"task":"answer","media":[{"w":1,"uri":"x"}],"query":"q"})"));
    CHECK(canonical_request(a) == canonical_request(b));
    CHECK(canonical_hash(a) == canonical_hash(b));
    CHECK(canonical_hash(a).size() == 16);
  }

  TEST_CASE("hash matches an independent SHA-256 prefix of the canonical bytes") {
    const auto r = request({{"z", 1}, {"a", {1.5, "x"}}}, 42, "prober-a");
    const std::string expected_bytes =
        R"({"backend_id":"prober-a","op_kind":"Judge","payload":{"a":[1.5,"x"],"z":1},"seed":42})";
    CHECK(canonical_request(r) == expected_bytes);
    CHECK(canonical_hash(r) == sha256_hex(expected_bytes).substr(0, 16));
  }

  TEST_CASE("seed, backend and op kind all enter the hash") {
    const auto base = request({{"q", "x"}});
    auto seeded = base;
    seeded.seed = 2;
    auto other = base;
    other.backend_id = "examiner";
    auto op = base;
    op.op_kind = OpKind::kAnswer;
    CHECK(canonical_hash(base) != canonical_hash(seeded));
    CHECK(canonical_hash(base) != canonical_hash(other));
    CHECK(canonical_hash(base) != canonical_hash(op));
  }

  TEST_CASE("request hash survives a serialization round-trip") {
    const auto r = request({{"x", 0.1}, {"y", -3}, {"s", "ü"}, {"n", nullptr}});
    const auto reparsed = json::parse(canonical_request(r));
    BackendRequest back{reparsed.at("backend_id"), parse_op_kind(reparsed.at("op_kind").get<std::string>()),
                        reparsed.at("payload"), reparsed.at("seed")};
    CHECK(canonical_hash(back) == canonical_hash(r));
  }

  TEST_CASE("replay returns the stored response byte-identically and misses fail") {
    auto cassette = std::make_shared<Cassette>();
    const auto hit = request({{"q", 1}});
    BackendResponse stored{ResponseStatus::kOk, std::string("\x89PNG\0\x01", 6), true, 17};
    cassette->append({canonical_hash(hit), hit.backend_id, json::object(), stored});
    auto net = std::make_shared<test::FailingTransport>();
    Gateway gw(GatewayMode::kReplay, test::fast_retry(), net, cassette);
    CHECK(gw.invoke(hit) == stored);
    CHECK(error_code_of([&] { gw.invoke(request({{"q", 2}})); }) == ErrorCode::kReplayMiss);
    CHECK(net->calls == 0);
    CHECK(gw.transport_calls() == 0);
  }

  TEST_CASE("record writes a cassette that replays without the transport") {
    test::TempDir dir("gw");
    const auto path = dir / "c.jsonl";
    auto mock = std::make_shared<test::MockTransport>([](const BackendRequest& r) {
      return test::ok("echo " + r.payload.at("q").dump());
    });
    {
      Gateway rec(GatewayMode::kRecord, test::fast_retry(), mock, Cassette::open_for_record(path));
      for (int i = 0; i < 5; ++i) CHECK(rec.invoke(request({{"q", i}})).body == "echo " + std::to_string(i));
      rec.invoke(request({{"q", 0}}));  // repeated request: one entry
    }
    CHECK(read_jsonl(path).size() == 5);
    auto net = std::make_shared<test::FailingTransport>();
    Gateway rep(GatewayMode::kReplay, test::fast_retry(), net, Cassette::load(path));
    for (int i = 0; i < 5; ++i) CHECK(rep.invoke(request({{"q", i}})).body == "echo " + std::to_string(i));
    CHECK(net->calls == 0);
  }

  TEST_CASE("transport errors are retried up to max_attempts") {
    int failures_left = 2;
    auto mock = std::make_shared<test::MockTransport>([&](const BackendRequest&) {
      if (failures_left-- > 0) throw std::runtime_error("reset");
      return test::ok("fine");
    });
    Gateway gw(GatewayMode::kLive, test::fast_retry(3), mock);
    CHECK(gw.invoke(request({})).body == "fine");
    CHECK(mock->calls() == 3);

    auto down = std::make_shared<test::MockTransport>(
        [](const BackendRequest&) { return BackendResponse{ResponseStatus::kTransportError, "503", false, 0}; });
    Gateway gw2(GatewayMode::kLive, test::fast_retry(4), down);
    CHECK(error_code_of([&] { gw2.invoke(request({})); }) == ErrorCode::kExhaustedRetries);
    CHECK(down->calls() == 4);
  }

  TEST_CASE("refusals are terminal and an empty OK body is a transport error") {
    auto refuse = std::make_shared<test::MockTransport>(
        [](const BackendRequest&) { return BackendResponse{ResponseStatus::kRefused, "no", false, 0}; });
    Gateway gw(GatewayMode::kLive, test::fast_retry(5), refuse);
    CHECK(gw.invoke(request({})).status == ResponseStatus::kRefused);
    CHECK(refuse->calls() == 1);

    auto empty = std::make_shared<test::MockTransport>([](const BackendRequest&) { return test::ok(""); });
    Gateway gw2(GatewayMode::kLive, test::fast_retry(2), empty);
    CHECK(error_code_of([&] { gw2.invoke(request({})); }) == ErrorCode::kExhaustedRetries);
  }

  TEST_CASE("in-flight requests per backend never exceed max_in_flight") {
    auto mock = std::make_shared<test::MockTransport>([](const BackendRequest&) { return test::ok("x"); },
                                                      std::chrono::milliseconds(3));
    Gateway gw(GatewayMode::kLive, test::fast_retry(1, 2), mock);
    parallel_for(40, 8, [&](std::size_t i) { gw.invoke(request({{"i", i}})); });
    CHECK(mock->calls() == 40);
    CHECK(mock->peak() <= 2);
    CHECK(mock->peak() >= 1);
  }

  TEST_CASE("the limit is per backend") {
    auto mock = std::make_shared<test::MockTransport>([](const BackendRequest&) { return test::ok("x"); },
                                                      std::chrono::milliseconds(5));
    Gateway gw(GatewayMode::kLive, test::fast_retry(1, 1), mock);
    parallel_for(20, 4, [&](std::size_t i) { gw.invoke(request({{"i", i}}, 1, i % 2 ? "a" : "b")); });
    CHECK(mock->peak() <= 2);
  }

  TEST_CASE("retry policy validation") {
    RetryPolicy p;
    CHECK_NOTHROW(p.validate());
    p.max_attempts = 0;
    CHECK(error_code_of([&] { p.validate(); }) == ErrorCode::kConfig);
    p = {};
    p.max_in_flight = 0;
    CHECK(error_code_of([&] { p.validate(); }) == ErrorCode::kConfig);
  }

  TEST_CASE("HTTP transport posts the canonical request and decodes base64 bodies") {
    httplib::Server srv;
    std::string seen_body, seen_auth;
    srv.Post("/v1/judge", [&](const httplib::Request& req, httplib::Response& res) {
      seen_body = req.body;
      seen_auth = req.get_header_value("Authorization");
      BackendResponse r{ResponseStatus::kOk, std::string("\x01\x02\x00\xff", 4), true, 0};
      res.set_content(to_json(r).dump(), "application/json");
    });
    srv.Post("/v1/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    const int port = srv.bind_to_any_port("127.0.0.1");
    std::thread th([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();

    ::setenv(api_key_env_var("judge").c_str(), "sekret", 1);
    std::map<std::string, BackendEndpoint> eps;
    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    eps["judge"] = {"judge", base + "/v1/judge", {{"Authorization", "Bearer ${API_KEY}"}}, 5000, json::object()};
    eps["broken"] = {"broken", base + "/v1/broken", {}, 5000, json::object()};
    auto http = std::make_shared<HttpTransport>(eps);
    Gateway gw(GatewayMode::kLive, test::fast_retry(2), http);

    const auto req = request({{"q", "x"}});
    const auto resp = gw.invoke(req);
    CHECK(resp.binary);
    CHECK(resp.body == std::string("\x01\x02\x00\xff", 4));
    CHECK(seen_body == canonical_request(req));
    CHECK(seen_auth == "Bearer sekret");
    CHECK(error_code_of([&] { gw.invoke(request({}, 1, "broken")); }) == ErrorCode::kExhaustedRetries);
    ::unsetenv(api_key_env_var("judge").c_str());
    srv.stop();
    th.join();
  }

  TEST_CASE("API key variables are derived from the backend id") {
    CHECK(api_key_env_var("prober-a") == "IVR_API_KEY_PROBER_A");
    CHECK(api_key_env_var("gpt.4o") == "IVR_API_KEY_GPT_4O");
  }
}
