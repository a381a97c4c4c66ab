// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "curation/backfill.hpp"
#include "curation/balance.hpp"
#include "curation/composition.hpp"
#include "curation/record.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ivr;
using ivr::test::error_code_of;

namespace {

// Brute force over every (i, t) that uses up at least one pool.
MixCounts oracle_mix(std::size_t I, std::size_t T, double target) {
  MixCounts best{};
  double best_dev = INFINITY;
  auto consider = [&](std::size_t i, std::size_t t) {
    if (i + t == 0) return;
    const double dev = std::fabs(static_cast<double>(i) / static_cast<double>(i + t) - target);
    const bool better = dev < best_dev - 1e-12 ||
                        (std::fabs(dev - best_dev) <= 1e-12 &&
                         (i + t > best.interleaved + best.textual ||
                          (i + t == best.interleaved + best.textual && i > best.interleaved)));
    if (better) {
      best = {i, t};
      best_dev = std::min(best_dev, dev);
    }
  };
  for (std::size_t t = 0; t <= T; ++t) consider(I, t);
  for (std::size_t i = 0; i <= I; ++i) consider(i, T);
  return best;
}

CompositionEntry entry(std::string mode, std::string corpus, std::string cat = "c", std::string mod = "SingleImage") {
  return {std::move(mode), std::move(corpus), std::move(cat), std::move(mod)};
}

ReasoningTuple random_tuple(std::mt19937_64& rng, int i) {
  auto text = [&](int len) {
    std::string s;
    static const std::vector<std::string> pieces{" ", "a", "b", "c", "X", "Y", "Z", ",", ".", "\"", "\\", "\n",
                                                 "0", "1", "<", ">", "é"};
    for (int k = 0; k < len; ++k) s += pieces[rng() % pieces.size()];
    return s.empty() ? std::string("x") : s;
  };
  ReasoningTuple t{"id" + std::to_string(i), "p" + text(rng() % 30), std::nullopt, "d" + text(rng() % 30),
                   rng() % 2 ? "B" : "3.5"};
  if (rng() % 2) t.vis = RenderedImage{"xmid/" + t.sample_id + ".png", rng() % 2 ? "BEV" : "POV"};
  return t;
}

VerifiedSample verified(Sample s, RoutePath path, bool retained) {
  VerifiedSample v;
  v.rendered.routed.sample = std::move(s);
  v.rendered.routed.decision = RoutingDecision{v.rendered.routed.sample.id, path, {}};
  if (path == RoutePath::kVisualPath) {
    v.rendered.render.status = RenderStatus::kRendered;
    v.rendered.render.kind = RenderKind::kBev;
    v.rendered.render.x_mid = GeneratedImage{"xmid/" + v.rendered.routed.sample.id + ".png", "h", 8, 8};
    VerificationTrail t;
    t.sample_id = v.rendered.routed.sample.id;
    t.final_verdict = retained ? FinalVerdict::kRetained : FinalVerdict::kRejectedBlindTest;
    v.trail = t;
  }
  return v;
}

}  // namespace

TEST_SUITE("curation") {
  TEST_CASE("balance examples") {
    CHECK(choose_mix_counts(100, 100, 0.5) == MixCounts{100, 100});
    CHECK(choose_mix_counts(60, 140, 0.4786) == MixCounts{60, 65});
    CHECK(oracle_mix(60, 140, 0.4786) == MixCounts{60, 65});
    CHECK(error_code_of([] { choose_mix_counts(0, 10, 0.5); }) == ErrorCode::kInsufficientPool);
    CHECK(error_code_of([] { choose_mix_counts(10, 0, 0.5); }) == ErrorCode::kInsufficientPool);
    CHECK(error_code_of([] { choose_mix_counts(10, 10, 1.0); }) == ErrorCode::kInvalidArgument);
    CHECK(error_code_of([] { choose_mix_counts(10, 10, 0.0); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("balance agrees with brute force on random pools") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 400; ++trial) {
      const std::size_t I = 1 + rng() % 120, T = 1 + rng() % 120;
      const double target = 0.02 + 0.96 * static_cast<double>(rng() % 1000) / 1000.0;
      CHECK(choose_mix_counts(I, T, target) == oracle_mix(I, T, target));
    }
  }

  TEST_CASE("balance selection is a pure function of pools, target and seed") {
    const auto a = balance_mix(50, 300, 0.4786, 9);
    const auto b = balance_mix(50, 300, 0.4786, 9);
    const auto c = balance_mix(50, 300, 0.4786, 10);
    CHECK(a.interleaved == b.interleaved);
    CHECK(a.textual == b.textual);
    CHECK(a.textual != c.textual);
    CHECK(a.textual.size() == a.counts.textual);
    CHECK(std::is_sorted(a.textual.begin(), a.textual.end()));
    CHECK(std::adjacent_find(a.textual.begin(), a.textual.end()) == a.textual.end());
    CHECK(a.textual.back() < 300);
  }

  TEST_CASE("composition with the reference counts") {
    std::vector<CompositionEntry> m;
    for (std::size_t i = 0; i < 31503; ++i) {
      m.push_back(entry(i < 15077 ? "Interleaved" : "Textual", i % 31503 < 15189 ? "SPAR" : (i % 2 ? "VSI" : "VLM3R")));
    }
    const auto r = composition_report(m);
    CHECK(r.total == 31503);
    CHECK(r.axes.at("mode").at("Interleaved").percent == 47.86);
    CHECK(r.axes.at("mode").at("Textual").percent == 52.14);
    CHECK(r.axes.at("source").at("SPAR").percent == 48.21);
    CHECK(r.axes.at("source").at("VSI+VLM3R").percent == 51.79);
    CHECK(r.axes.at("source").at("VSI+VLM3R").count == 16314);
  }

  TEST_CASE("half-up percentages against integer arithmetic") {
    CHECK(percent_half_up(1, 8) == 12.5);
    CHECK(percent_half_up(1, 3) == 33.33);
    CHECK(percent_half_up(2, 3) == 66.67);
    CHECK(percent_half_up(1, 80000) == 0.0);
    CHECK(percent_half_up(1, 40000) == 0.0);  // 0.0025% rounds half-up to 0.00
    CHECK(percent_half_up(1, 20000) == 0.01);  // 0.005% is the half point
    std::mt19937_64 rng(2);
    for (int i = 0; i < 2000; ++i) {
      const std::size_t total = 1 + rng() % 100000, count = rng() % (total + 1);
      const std::size_t hundredths = (count * 20000 + total) / (2 * total);
      CHECK(percent_half_up(count, total) == static_cast<double>(hundredths) / 100.0);
    }
  }

  TEST_CASE("every axis sums to the total") {
    std::mt19937_64 rng(4);
    std::vector<CompositionEntry> m;
    const char* modes[] = {"Interleaved", "Textual"};
    const char* corpora[] = {"SPAR", "VSI", "VLM3R", "OTHER"};
    const char* mods[] = {"SingleImage", "MultiView", "VideoFrames"};
    for (int i = 0; i < 777; ++i) {
      m.push_back(entry(modes[rng() % 2], corpora[rng() % 4], "cat" + std::to_string(rng() % 9), mods[rng() % 3]));
    }
    const auto r = composition_report(m);
    for (const auto& [axis, buckets] : r.axes) {
      std::size_t n = 0;
      double pct = 0;
      for (const auto& [label, b] : buckets) n += b.count, pct += b.percent;
      CHECK(n == 777);
      CHECK(std::fabs(pct - 100.0) <= 0.005 * static_cast<double>(buckets.size()));
    }
  }

  TEST_CASE("single sample and empty manifests") {
    const std::vector<CompositionEntry> one{entry("Textual", "VSI", "room_size", "VideoFrames")};
    const auto r = composition_report(one);
    for (const auto& [axis, buckets] : r.axes) {
      CHECK(buckets.size() == 1);
      CHECK(buckets.begin()->second.percent == 100.0);
    }
    CHECK(error_code_of([] { composition_report({}); }) == ErrorCode::kEmpty);
  }

  TEST_CASE("composition entries come from any manifest-like line") {
    CHECK(composition_entry_from_json({{"mode", "Interleaved"}, {"corpus", "SPAR"}}).mode == "Interleaved");
    const json routed = {{"sample", {{"corpus", "VSI"}, {"task_category", "x"}}},
                         {"routing", {{"path", "VisualPath"}}}};
    const auto e = composition_entry_from_json(routed);
    CHECK(e.corpus == "VSI");
    CHECK(source_group("VLM3R") == "VSI+VLM3R");
    CHECK(source_group("SPAR") == "SPAR");
  }

  TEST_CASE("record layouts") {
    const ReasoningTuple vis{"a", "plan", RenderedImage{"xmid/a.png", "BEV"}, "deduct", "B"};
    const auto r = assemble_record(vis);
    std::vector<SegmentKind> kinds;
    for (const auto& s : r.segments) kinds.push_back(s.kind);
    CHECK(kinds == std::vector<SegmentKind>{SegmentKind::kPlan, SegmentKind::kImageStart, SegmentKind::kImage,
                                            SegmentKind::kImageEnd, SegmentKind::kDeduct, SegmentKind::kAnswer});
    CHECK(r.mode == RecordMode::kInterleaved);
    CHECK(flatten_sequence(r) == "plan <img_start>[image:xmid/a.png]<img_end> deduct\nAnswer: B");

    const ReasoningTuple txt{"b", "plan", std::nullopt, "deduct", "3.5"};
    const auto t = assemble_record(txt);
    kinds.clear();
    for (const auto& s : t.segments) kinds.push_back(s.kind);
    CHECK(kinds == std::vector<SegmentKind>{SegmentKind::kPlan, SegmentKind::kDeduct, SegmentKind::kAnswer});
    CHECK(t.mode == RecordMode::kTextual);
  }

  TEST_CASE("parse(serialize(r)) == r for random tuples") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 300; ++i) {
      const auto r = assemble_record(random_tuple(rng, i));
      CHECK(parse_record(serialize_record(r)) == r);
      CHECK(serialize_record(parse_record(serialize_record(r))) == serialize_record(r));
    }
  }

  TEST_CASE("records with a broken layout do not parse") {
    const auto r = assemble_record({"a", "plan", std::nullopt, "deduct", "B"});
    json j = record_to_json(r);
    j["mode"] = "Interleaved";
    CHECK(error_code_of([&] { record_from_json(j); }) == ErrorCode::kParse);
    j = record_to_json(r);
    std::swap(j["segments"][0], j["segments"][1]);
    CHECK(error_code_of([&] { record_from_json(j); }) == ErrorCode::kParse);
  }

  TEST_CASE("chain acceptance") {
    const auto b = AnswerSpec::multiple_choice({"A", "B", "C"}, "B");
    const auto ok = accept_chain(R"({"plan":"look","deduct":"...so the answer is B"})", b, 0.25);
    CHECK(ok.plan == "look");
    CHECK(error_code_of([&] { accept_chain(R"({"plan":"look","deduct":"so it is C","answer":"C"})", b, 0.25); }) ==
          ErrorCode::kInconsistentChain);
    CHECK(error_code_of([&] { accept_chain(R"({"plan":"","deduct":"B","answer":"B"})", b, 0.25); }) ==
          ErrorCode::kInvalidArgument);
    CHECK(error_code_of([&] { accept_chain("not json", b, 0.25); }) == ErrorCode::kMalformedResponse);
    const auto n = AnswerSpec::numeric(2.0);
    CHECK_NOTHROW(accept_chain(R"({"plan":"p","deduct":"d","answer":"2.1 m"})", n, 0.25));
  }

  TEST_CASE("backfill builds textual and interleaved tuples and counts drops") {
    auto mock = std::make_shared<test::MockTransport>([](const BackendRequest& r) {
      const std::string id = r.payload.at("sample_id");
      const std::string gold = r.payload.at("gold_answer");
      if (id == "wrong") return test::ok(R"({"plan":"p","deduct":"d","answer":"C"})");
      if (id == "noplan") return test::ok(R"({"plan":"","deduct":"d","answer":")" + gold + "\"}");
      if (id == "refuse") return BackendResponse{ResponseStatus::kRefused, "no", false, 0};
      json chain = {{"plan", "plan for " + id}, {"deduct", "so the answer is " + gold}, {"answer", gold}};
      if (r.payload.at("task") == "interleaved_chain") chain["plan"] = "look at " + r.payload.at("image").at("uri").get<std::string>();
      return test::ok(chain.dump());
    });
    Gateway gw(GatewayMode::kLive, test::fast_retry(), mock);
    const std::vector<VerifiedSample> in{
        verified(test::mc_sample("t1"), RoutePath::kTextPath, false),
        verified(test::mc_sample("wrong"), RoutePath::kTextPath, false),
        verified(test::mc_sample("noplan"), RoutePath::kTextPath, false),
        verified(test::mc_sample("refuse"), RoutePath::kTextPath, false),
        verified(test::mc_sample("v1"), RoutePath::kVisualPath, true),
        verified(test::mc_sample("v2"), RoutePath::kVisualPath, false),
    };
    BackfillConfig cfg{"synth", 0.25, true};
    const auto r = backfill_corpus(in, cfg, gw, 3, 3);
    REQUIRE(r.tuples.size() == 2);
    CHECK(r.tuples[0].tuple.sample_id == "t1");
    CHECK_FALSE(r.tuples[0].tuple.vis);
    CHECK(r.tuples[0].mode == RecordMode::kTextual);
    CHECK(r.tuples[1].tuple.sample_id == "v1");
    REQUIRE(r.tuples[1].tuple.vis);
    CHECK(r.tuples[1].tuple.vis->render_kind == "BEV");
    CHECK(r.tuples[1].tuple.plan == "look at xmid/v1.png");
    CHECK(r.tuples[1].verification.has_value());
    CHECK(r.stats.textual.candidates == 4);
    CHECK(r.stats.textual.accepted == 1);
    CHECK(r.stats.textual.dropped.at("InconsistentChain") == 1);
    CHECK(r.stats.textual.dropped.at("Refused") == 1);
    CHECK(r.stats.interleaved.candidates == 1);

    const auto line = tuple_line_from_json(json::parse(to_json(r.tuples[1]).dump()));
    CHECK(line.tuple == r.tuples[1].tuple);
    CHECK(line.sample == r.tuples[1].sample);
  }

  TEST_CASE("backfill_textual rejects visual-path candidates") {
    Gateway gw(GatewayMode::kLive, test::fast_retry(), std::make_shared<test::FailingTransport>());
    RoutedSample r;
    r.sample = test::mc_sample("v");
    r.decision = RoutingDecision{"v", RoutePath::kVisualPath, {}};
    CHECK(error_code_of([&] { backfill_textual({r}, {"synth"}, gw, 0, 1); }) == ErrorCode::kInvalidArgument);
  }
}
