// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "helpers.hpp"
#include "verify/leakage.hpp"
#include "verify/verifier.hpp"

using namespace ivr;

namespace {

std::vector<std::string> one(std::string s) { return {std::move(s)}; }

const ImageBlob kImage{"\x89PNG fake", "abc123"};

RenderRecord bev_render() {
  RenderRecord r;
  r.status = RenderStatus::kRendered;
  r.kind = RenderKind::kBev;
  r.prompt = PromptSpec{"Draw a top-down map.", "Keep markers.", {}, std::nullopt};
  return r;
}

struct Scripted {
  std::string judge = R"({"verdict":"pass","reason":""})";
  std::string examiner = "B";
  ResponseStatus judge_status = ResponseStatus::kOk;
  std::atomic<int> judge_calls{0};
  std::atomic<int> examiner_calls{0};
  json last_examiner_payload;

  std::shared_ptr<test::MockTransport> transport() {
    return std::make_shared<test::MockTransport>([this](const BackendRequest& r) {
      if (r.backend_id == "judge") {
        ++judge_calls;
        return BackendResponse{judge_status, judge, false, 0};
      }
      ++examiner_calls;
      last_examiner_payload = r.payload;
      return test::ok(examiner);
    });
  }
};

VerifierConfig cfg() { return {"judge", "examiner", 0.25}; }

VerificationTrail trail_with(FinalVerdict v) {
  VerificationTrail t;
  t.final_verdict = v;
  if (v == FinalVerdict::kRejectedLeakage) t.leakage.pass = false;
  if (v != FinalVerdict::kRejectedLeakage) {
    t.factuality = FactualityOutcome{v == FinalVerdict::kRejectedFactuality ? FactualityResult::kFail
                                                                             : FactualityResult::kPass,
                                     ""};
  }
  if (v == FinalVerdict::kRetained || v == FinalVerdict::kRejectedBlindTest) {
    t.blind_test = BlindOutcome{v == FinalVerdict::kRetained ? BlindResult::kKeep : BlindResult::kDiscard, ""};
  }
  return t;
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("linter examples") {
    const auto four = AnswerSpec::numeric(4.0);
    CHECK_FALSE(lint_zero_leakage(one("the answer is 4"), four).pass);
    const auto r = lint_zero_leakage(one("4 red chairs"), four);
    REQUIRE_FALSE(r.pass);
    CHECK(r.spans.front().begin == 0);
    CHECK(r.spans.front().end == 1);
    CHECK(r.spans.front().rule == LeakageRule::kNumeral);
    const auto b = AnswerSpec::multiple_choice({"A", "B", "C"}, "B");
    CHECK(lint_zero_leakage(one("objects A and B marked"), b).pass);
    CHECK_FALSE(lint_zero_leakage(one("so the Answer is B."), b).pass);
  }

  TEST_CASE("numerals match by value, not by substring") {
    const auto g = AnswerSpec::numeric(4.0);
    CHECK_FALSE(lint_zero_leakage(one("about 4.0 m away"), g).pass);
    CHECK(lint_zero_leakage(one("room 14 and 40 chairs"), g).pass);
    CHECK(lint_zero_leakage(one("marker B4"), g).pass);
  }

  TEST_CASE("multi-character gold strings match case-insensitively on word boundaries") {
    auto g = AnswerSpec::multiple_choice({"A", "B"}, "A");
    g.options[0].text = "left";
    g.options[1].text = "right";
    CHECK_FALSE(lint_zero_leakage(one("Turn LEFT at the door"), g).pass);
    CHECK(lint_zero_leakage(one("the leftmost shelf"), g).pass);
  }

  TEST_CASE("spans point at the offending text index") {
    const auto g = AnswerSpec::numeric(7.5);
    const std::vector<std::string> texts{"clean", "walk 7.5 meters"};
    const auto r = lint_zero_leakage(texts, g);
    REQUIRE_FALSE(r.pass);
    CHECK(r.spans.front().text_index == 1);
    CHECK(texts[1].substr(r.spans.front().begin, r.spans.front().end - r.spans.front().begin) == "7.5");
    const auto back = leakage_from_json(to_json(r));
    CHECK(back.pass == r.pass);
    CHECK(back.spans == r.spans);
  }

  TEST_CASE("appending text never turns a failure into a pass") {
    std::mt19937_64 rng(5);
    const char* words[] = {"the", "answer", "is", "B", "4", "chair", "4.5", "left", "door", "A"};
    auto g = AnswerSpec::multiple_choice({"A", "B"}, "B");
    g.options[1].text = "door";
    const auto n = AnswerSpec::numeric(4.5);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<std::string> texts{""};
      for (int w = 0; w < 12; ++w) {
        const bool before_b = lint_zero_leakage(texts, g).pass;
        const bool before_n = lint_zero_leakage(texts, n).pass;
        if (rng() % 4 == 0) texts.emplace_back();
        texts.back() += std::string(words[rng() % 10]) + " ";
        if (!before_b) CHECK_FALSE(lint_zero_leakage(texts, g).pass);
        if (!before_n) CHECK_FALSE(lint_zero_leakage(texts, n).pass);
      }
    }
  }

  TEST_CASE("judge fail rejects at factuality and skips the examiner") {
    Scripted s;
    s.judge = R"({"verdict":"fail","reason":"topology corruption"})";
    Gateway gw(GatewayMode::kLive, test::fast_retry(), s.transport());
    const auto t = verify_sample(test::mc_sample("a"), bev_render(), kImage, cfg(), gw, 1);
    CHECK(t.final_verdict == FinalVerdict::kRejectedFactuality);
    CHECK(t.factuality->reason == "topology corruption");
    CHECK_FALSE(t.blind_test);
    CHECK(s.examiner_calls == 0);
  }

  TEST_CASE("blind test keeps a matching examiner answer") {
    Scripted s;
    Gateway gw(GatewayMode::kLive, test::fast_retry(), s.transport());
    const auto sample = test::mc_sample("a", "B");
    auto t = verify_sample(sample, bev_render(), kImage, cfg(), gw, 1);
    CHECK(t.final_verdict == FinalVerdict::kRetained);
    CHECK(t.blind_test->examiner_answer == "B");
    // only x_mid and the question reach the examiner
    CHECK(s.last_examiner_payload.dump().find(sample.media[0].uri) == std::string::npos);
    CHECK(s.last_examiner_payload.at("images").size() == 1);
    CHECK(s.last_examiner_payload.at("query") == sample.query);

    s.examiner = "C";
    t = verify_sample(sample, bev_render(), kImage, cfg(), gw, 2);
    CHECK(t.final_verdict == FinalVerdict::kRejectedBlindTest);

    s.examiner = "2.2 meters";
    t = verify_sample(test::numeric_sample("n", 2.0, "route_plan"), bev_render(), kImage, cfg(), gw, 3);
    CHECK(t.final_verdict == FinalVerdict::kRetained);
  }

  TEST_CASE("transport failure and malformed replies are unverified") {
    Scripted s;
    s.judge_status = ResponseStatus::kTransportError;
    Gateway gw(GatewayMode::kLive, test::fast_retry(3), s.transport());
    auto t = verify_sample(test::mc_sample("a"), bev_render(), kImage, cfg(), gw, 1);
    CHECK(t.final_verdict == FinalVerdict::kUnverified);
    CHECK(t.factuality->result == FactualityResult::kUnverified);
    CHECK(s.judge_calls == 3);

    s.judge_status = ResponseStatus::kOk;
    s.judge = "looks fine to me";
    t = verify_sample(test::mc_sample("a"), bev_render(), kImage, cfg(), gw, 1);
    CHECK(t.final_verdict == FinalVerdict::kUnverified);
    CHECK(t.factuality->reason == "MalformedJudgeResponse");
  }

  TEST_CASE("a leaking prompt is rejected before any backend call") {
    Scripted s;
    Gateway gw(GatewayMode::kLive, test::fast_retry(), s.transport());
    auto render = bev_render();
    render.prompt->instruction = "Draw the route of 3.5 meters.";
    const auto t = verify_sample(test::numeric_sample("n", 3.5, "route_plan"), render, kImage, cfg(), gw, 1);
    CHECK(t.final_verdict == FinalVerdict::kRejectedLeakage);
    CHECK_FALSE(t.factuality);
    CHECK(s.judge_calls == 0);
  }

  TEST_CASE("stage statistics examples") {
    std::vector<std::pair<std::string, VerificationTrail>> all_pass(10, {"SPAR", trail_with(FinalVerdict::kRetained)});
    const auto st = stage_statistics(all_pass);
    CHECK(st.overall.retention() == 1.0);
    CHECK(st.overall.stage1_rate() == 0.0);
    CHECK(st.overall.stage2_rate() == 0.0);
    CHECK(expected_retention(0.373, 0.246) == doctest::Approx(0.472758).epsilon(1e-12));
    CHECK(expected_retention(0.527, 0.640) == doctest::Approx(0.17028).epsilon(1e-12));
  }

  TEST_CASE("retention identity holds exactly on synthetic trails") {
    // counts chosen so r1 and r2 are the tabulated rates exactly
    const struct {
      std::size_t c, s1, s2;
    } rows[] = {{1000, 373, 246}, {500000, 186500, 77121}, {100000, 52700, 30272}, {17, 0, 0}, {8, 8, 0}};
    for (const auto& r : rows) {
      std::vector<std::pair<std::string, VerificationTrail>> trails;
      for (std::size_t i = 0; i < r.s1; ++i) trails.push_back({"X", trail_with(FinalVerdict::kRejectedFactuality)});
      for (std::size_t i = 0; i < r.s2; ++i) trails.push_back({"X", trail_with(FinalVerdict::kRejectedBlindTest)});
      for (std::size_t i = r.s1 + r.s2; i < r.c; ++i) trails.push_back({"X", trail_with(FinalVerdict::kRetained)});
      const auto c = stage_statistics(trails).overall;
      CHECK(c.candidates == r.c);
      const double lhs = static_cast<double>(c.retained) / static_cast<double>(c.candidates);
      // exact in rationals: retained/c == (c-s1)/c * (c-s1-s2)/(c-s1)
      CHECK(c.retained * (c.candidates - c.stage1_rejected) ==
            (c.candidates - c.stage1_rejected) * (c.candidates - c.stage1_rejected - c.stage2_rejected));
      CHECK(lhs == doctest::Approx(expected_retention(c.stage1_rate(), c.stage2_rate())).epsilon(1e-15));
    }
  }

  TEST_CASE("unverified samples leave the rate denominators of stages they never reached") {
    std::vector<std::pair<std::string, VerificationTrail>> trails;
    auto unv1 = trail_with(FinalVerdict::kUnverified);
    unv1.factuality->result = FactualityResult::kUnverified;
    auto unv2 = trail_with(FinalVerdict::kUnverified);
    unv2.blind_test = BlindOutcome{BlindResult::kUnverified, ""};
    trails = {{"A", trail_with(FinalVerdict::kRejectedFactuality)},
              {"A", trail_with(FinalVerdict::kRejectedBlindTest)},
              {"A", trail_with(FinalVerdict::kRetained)},
              {"A", unv1},
              {"A", unv2},
              {"A", trail_with(FinalVerdict::kRejectedLeakage)}};
    const auto c = stage_statistics(trails).overall;
    CHECK(c.candidates == 6);
    CHECK(c.stage1_rejected == 2);
    CHECK(c.leakage_rejected == 1);
    CHECK(c.unverified_stage1 == 1);
    CHECK(c.unverified_stage2 == 1);
    CHECK(c.candidates == c.stage1_rejected + c.stage2_rejected + c.retained + c.unverified());
    CHECK(c.stage1_rate() == doctest::Approx(2.0 / 5.0));
    CHECK(c.stage2_rate() == doctest::Approx(1.0 / 2.0));
  }

  TEST_CASE("stats merge per corpus and render a rate table") {
    StageStats a, b;
    a.add("SPAR", trail_with(FinalVerdict::kRetained));
    b.add("VSI", trail_with(FinalVerdict::kRejectedFactuality));
    b.add("SPAR", trail_with(FinalVerdict::kRejectedBlindTest));
    StageStats ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    CHECK(ab.to_json() == ba.to_json());
    const auto j = ab.to_json();
    CHECK(j.at("rows").at("Factuality Check").at("VSI") == 100.0);
    CHECK(j.at("rows").at("Blind Test").at("SPAR") == 50.0);
  }

  TEST_CASE("trail JSON round-trips") {
    auto t = trail_with(FinalVerdict::kRejectedBlindTest);
    t.sample_id = "z";
    t.blind_test->examiner_answer = "C";
    const auto back = trail_from_json(json::parse(to_json(t).dump()));
    CHECK(back.final_verdict == t.final_verdict);
    CHECK(back.blind_test->examiner_answer == "C");
    CHECK(to_json(back) == to_json(t));
  }
}
