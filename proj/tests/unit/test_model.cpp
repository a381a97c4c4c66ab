// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "helpers.hpp"
#include "model/answer.hpp"
#include "model/sample.hpp"

using namespace ivr;
using ivr::test::error_code_of;

TEST_SUITE("model") {
  TEST_CASE("multiple choice answers normalize to the bare label") {
    const auto spec = AnswerSpec::multiple_choice({"A", "B", "C", "D"}, "B");
    CHECK(canonicalize_answer(" b. ", spec).label() == "B");
    CHECK(canonicalize_answer("(C)", spec).label() == "C");
    CHECK(canonicalize_answer("The answer is D.", spec).label() == "D");
    CHECK(error_code_of([&] { canonicalize_answer("E", spec); }) == ErrorCode::kUnparseable);
  }

  TEST_CASE("option text maps to its label") {
    auto spec = AnswerSpec::multiple_choice({"A", "B"}, "A");
    spec.options[0].text = "left";
    spec.options[1].text = "right";
    CHECK(canonicalize_answer("right", spec).label() == "B");
  }

  TEST_CASE("numeric answers strip units and reject number words") {
    const auto spec = AnswerSpec::numeric(3.5, "m");
    CHECK(canonicalize_answer("3.50 meters", spec).number() == 3.5);
    CHECK(canonicalize_answer("-2", spec).number() == -2.0);
    CHECK(error_code_of([&] { canonicalize_answer("three", spec); }) == ErrorCode::kUnparseable);
    CHECK_FALSE(try_canonicalize("three", spec).has_value());
  }

  TEST_CASE("canonicalization is idempotent") {
    const auto mc = AnswerSpec::multiple_choice({"A", "B", "C", "D"}, "A");
    const auto num = AnswerSpec::numeric(1.0);
    for (const char* raw : {" b. ", "(a)", "answer is C", "d"}) {
      const auto once = canonicalize_answer(raw, mc);
      CHECK(canonicalize_answer(once.to_string(), mc) == once);
    }
    for (const char* raw : {"3.50 meters", "12 m", "0.125", "-7.5 cm", "1e3"}) {
      const auto once = canonicalize_answer(raw, num);
      CHECK(canonicalize_answer(once.to_string(), num) == once);
    }
  }

  TEST_CASE("format_number round-trips") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
      const double v = d(rng);
      CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(0.1) == "0.1");
  }

  TEST_CASE("numerals are found as standalone tokens") {
    const auto m = find_numerals("4 red chairs, room b12 and 3.5m");
    REQUIRE(m.size() >= 2);
    CHECK(m[0].offset == 0);
    CHECK(m[0].value == 4.0);
    bool saw_b12 = false;
    for (const auto& x : m) saw_b12 |= x.value == 12.0;
    CHECK_FALSE(saw_b12);
  }

  TEST_CASE("validate_sample reports each injected defect") {
    const Sample good = test::mc_sample("ok");
    CHECK(validate_sample(good).empty());

    Sample no_media = good;
    no_media.media.clear();
    CHECK(validate_sample(no_media) == std::vector<std::string>{"media non-empty"});

    Sample frames = good;
    frames.input_modality = InputModality::kVideoFrames;
    frames.media.assign(12, {"f.jpg", MediaKind::kRgb, 64, 64});
    frames.frame_count = 16;
    CHECK(validate_sample(frames) == std::vector<std::string>{"frame_count mismatch"});
    frames.frame_count = 12;
    CHECK(validate_sample(frames).empty());

    Sample bad_gold = good;
    bad_gold.answer.label = "Z";
    CHECK(validate_sample(bad_gold) == std::vector<std::string>{"answer value among mc_options"});

    Sample nan_gold = test::numeric_sample("n", 1.0);
    nan_gold.answer.number = std::nan("");
    CHECK(validate_sample(nan_gold) == std::vector<std::string>{"numeric answer finite"});

    Sample empty_id = good;
    empty_id.id.clear();
    CHECK(validate_sample(empty_id) == std::vector<std::string>{"id non-empty"});
  }

  TEST_CASE("validate_manifest flags exactly the defective entries") {
    std::mt19937_64 rng(11);
    std::vector<Sample> manifest;
    std::vector<bool> defective;
    for (int i = 0; i < 100; ++i) {
      Sample s = test::mc_sample("s" + std::to_string(i));
      const bool inject = rng() % 3 == 0;
      if (inject) {
        switch (rng() % 3) {
          case 0: s.media.clear(); break;
          case 1: s.media[0].width = 0; break;
          default: s.answer.label = "Q"; break;
        }
      }
      manifest.push_back(s);
      defective.push_back(inject);
    }
    manifest.push_back(test::mc_sample("s0"));  // duplicate id
    defective.push_back(true);
    const auto v = validate_manifest(manifest);
    REQUIRE(v.size() == manifest.size());
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i].empty() == !defective[i]);
  }

  TEST_CASE("sample JSON round-trips and preserves unknown fields") {
    Sample s = test::numeric_sample("x1", 2.5);
    s.extra["markers"] = json::array({"sofa", "lamp"});
    s.extra["custom"] = {{"nested", 1}};
    const json j = to_json(s);
    CHECK(j.at("custom").at("nested") == 1);
    CHECK(sample_from_json(j) == s);
    CHECK(sample_from_json(json::parse(j.dump())) == s);
  }

  TEST_CASE("manifest load rejects malformed rows with the line number") {
    test::TempDir dir("model");
    write_file(dir / "m.jsonl", to_json(test::mc_sample("a")).dump() + "\n{\"id\":\"b\"}\n");
    try {
      load_manifest(dir / "m.jsonl");
      FAIL("expected a parse failure");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("record 2") != std::string::npos);
    }
  }

  TEST_CASE("tuples require plan and deduction") {
    ReasoningTuple t{"a", "plan", std::nullopt, "deduct", "B"};
    CHECK_NOTHROW(check_tuple(t));
    t.plan.clear();
    CHECK(error_code_of([&] { check_tuple(t); }) == ErrorCode::kInvalidArgument);
    ReasoningTuple v{"b", "p", RenderedImage{"xmid/b.png", "BEV"}, "d", "3.5"};
    CHECK(tuple_from_json(to_json(v)) == v);
  }
}
