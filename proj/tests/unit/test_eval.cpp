// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "eval/eval.hpp"
#include "helpers.hpp"

using namespace ivr;
using ivr::test::error_code_of;

namespace {

// Ten thresholds 0.50..0.95 counted with exact rational arithmetic:
// rel < 1 - k/20  <=>  20 |p - g| < (20 - k) |g|.
double oracle_mra_rational(long p, long g) {
  int hits = 0;
  for (int k = 10; k <= 19; ++k) hits += 20 * std::labs(p - g) < (20 - k) * std::labs(g);
  return hits / 10.0;
}

std::map<std::string, double> ours_row() {
  return {{"Depth-OC", 70.2}, {"Depth-OO", 35.2}, {"Dist-OC", 72.8}, {"Dist-OO", 50.0},
          {"PosMatch", 84.0}, {"CamPose", 36.0},  {"ViewChgI", 29.9}, {"DistI-OO", 76.3},
          {"ObjRel-OC", 84.5}, {"ObjRel-OO", 83.5}, {"SpImag-OC", 58.1}, {"SpImag-OO", 60.3}};
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("MRA examples") {
    CHECK(mra(4.0, 4.0) == 1.0);
    CHECK(mra(1.2 * 5.0, 5.0) == 0.6);
    CHECK(mra(1.6 * 5.0, 5.0) == 0.0);
    CHECK(mra(0.0, 0.0) == 1.0);
    CHECK(mra(0.1, 0.0) == 0.0);
    CHECK(mra(-12.0, -10.0) == 0.6);
  }

  TEST_CASE("MRA against an exact rational oracle") {
    for (long g = 1; g <= 40; ++g) {
      for (long p = -10; p <= 100; ++p) {
        CHECK(mra(static_cast<double>(p), static_cast<double>(g)) == oracle_mra_rational(p, g));
      }
    }
  }

  TEST_CASE("MRA scale invariance and monotonicity") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(-50, 50);
    for (int i = 0; i < 1000; ++i) {
      const double p = d(rng), g = d(rng), a = d(rng);
      if (g == 0.0 || a == 0.0) continue;
      CHECK(mra(a * p, a * g) == mra(p, g));
    }
    double prev = 1.0;
    for (int k = 0; k <= 200; ++k) {
      const double s = mra(10.0 + k * 0.05, 10.0);
      CHECK(s <= prev);
      prev = s;
    }
  }

  TEST_CASE("multiple-choice accuracy") {
    const std::map<std::string, std::string> gold{{"a", "A"}, {"b", "B"}, {"c", "C"}, {"d", "D"}};
    CHECK(mc_accuracy(gold, gold).accuracy == 1.0);
    auto preds = gold;
    preds["d"] = "A";
    CHECK(mc_accuracy(preds, gold).accuracy == 0.75);
    preds = gold;
    preds.erase("c");
    const auto t = mc_accuracy(preds, gold);
    CHECK(t.accuracy == 0.75);
    CHECK(t.missing == std::vector<std::string>{"c"});
  }

  TEST_CASE("dimension reduction and tiers") {
    const auto r = reduce_dimensions({{"x-si", 60}, {"x-mv", 70}, {"solo", 42}}, {{"x-si", "X"}, {"x-mv", "X"}});
    CHECK(r.at("X") == 65.0);
    CHECK(r.at("solo") == 42.0);
    const auto tiers = tier_average(ours_row(), spar_default_tiers());
    REQUIRE(tiers.size() == 3);
    CHECK(tiers[0].first == "Low");
    CHECK(format_score(tiers[0].second) == "57.05");
    CHECK(tier_average({{"only", 33.0}}, {{"T", {"only"}}})[0].second == 33.0);
    CHECK(error_code_of([] { tier_average({{"orphan", 1.0}}, spar_default_tiers()); }) ==
          ErrorCode::kUnassignedCategory);
  }

  TEST_CASE("reduce-then-tier equals a half-weighted single pass") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> d(0, 100);
    for (int trial = 0; trial < 200; ++trial) {
      std::map<std::string, double> scores;
      std::map<std::string, std::string> pairing;
      TierMap tiers{{"T0", {}}, {"T1", {}}};
      std::map<std::string, std::pair<double, double>> weighted;  // tier -> (sum w*s, sum w)
      for (int c = 0; c < 6; ++c) {
        const std::string cat = "c" + std::to_string(c);
        const std::string tier = c % 2 ? "T1" : "T0";
        tiers[c % 2].second.push_back(cat);
        if (rng() % 2) {
          const double a = d(rng), b = d(rng);
          scores[cat + "-si"] = a;
          scores[cat + "-mv"] = b;
          pairing[cat + "-si"] = cat;
          pairing[cat + "-mv"] = cat;
          weighted[tier].first += 0.5 * a + 0.5 * b;
        } else {
          const double a = d(rng);
          scores[cat] = a;
          weighted[tier].first += a;
        }
        weighted[tier].second += 1.0;
      }
      const auto got = tier_average(reduce_dimensions(scores, pairing), tiers);
      for (const auto& [tier, avg] : got) {
        CHECK(avg == doctest::Approx(weighted[tier].first / weighted[tier].second).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("report overall under both weightings") {
    const auto r = build_report("spar", ours_row(), {}, spar_default_tiers());
    CHECK(format_score(r.overall_per_reduced_category) == "61.73");
    CHECK(r.categories.size() == 12);
    CHECK(r.categories.front().name == "Depth-OC");
    CHECK(r.categories.front().tier == "Low");
    CHECK(error_code_of([] { build_report("spar", {}, {}, {}); }) == ErrorCode::kEmpty);
  }

  TEST_CASE("report JSON round-trip and markdown layout") {
    auto r = build_report("spar", ours_row(), {}, spar_default_tiers());
    r.samples = 120;
    r.missing = 1;
    r.flags = {"MissingPrediction: q9"};
    CHECK(report_from_json(json::parse(report_to_json(r).dump())) == r);
    const auto md = report_to_markdown(r);
    for (const auto& [name, _] : ours_row()) CHECK(md.find("| | " + name + " |") != std::string::npos);
    CHECK(md.find("| **Low** | | **57.05** |") != std::string::npos);
    CHECK(md.find("| **Mid** |") != std::string::npos);
    CHECK(md.find("| **High** |") != std::string::npos);
    EvalReport empty;
    CHECK(error_code_of([&] { report_to_markdown(empty); }) == ErrorCode::kEmpty);
  }

  TEST_CASE("score formatting rounds half-up on the decimal representation") {
    CHECK(format_score(57.05) == "57.05");
    CHECK(format_score(0.125) == "0.13");
    CHECK(format_score(2.675) == "2.68");
    CHECK(format_score(99.995) == "100.00");
    CHECK(format_score(-1.005) == "-1.01");
    CHECK(format_score(0.0) == "0.00");
  }

  TEST_CASE("evaluate_files scores a manifest") {
    test::TempDir dir("eval");
    std::vector<Sample> gold{test::mc_sample("a", "A", "Depth-OC"), test::mc_sample("b", "B", "Depth-OC"),
                             test::numeric_sample("c", 10.0, "Dist-OC"), test::numeric_sample("d", 5.0, "Dist-OC")};
    save_manifest(dir / "gold.jsonl", gold);
    write_jsonl(dir / "pred.jsonl", {{{"sample_id", "a"}, {"answer", "A"}},
                                     {{"sample_id", "b"}, {"raw", "The answer is C."}},
                                     {{"sample_id", "c"}, {"answer", "12 m"}}});
    write_file(dir / "tiers.json", R"({"tiers":{"Low":["Depth-OC","Dist-OC"]}})");
    const auto r = evaluate_files({dir / "pred.jsonl", dir / "gold.jsonl", dir / "tiers.json"}, {});
    CHECK(r.subtask_scores.at("Depth-OC") == 50.0);
    CHECK(r.subtask_scores.at("Dist-OC") == doctest::Approx(30.0));
    CHECK(r.missing == 1);
    CHECK(r.samples == 4);
    CHECK(r.tiers.at(0).second == doctest::Approx(40.0));
  }

  TEST_CASE("protocol validation") {
    ProtocolConfig p;
    CHECK(p.thresholds().size() == 10);
    p.name = "other";
    CHECK(error_code_of([&] { p.validate(); }) == ErrorCode::kConfig);
  }
}
