// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "numerics/kernels.hpp"

using namespace ivr;
using ivr::test::error_code_of;

namespace {

std::vector<TokenSpan> random_layout(std::mt19937_64& rng, std::size_t max_len) {
  std::vector<TokenSpan> spans;
  std::size_t total = 0;
  const std::size_t target = 1 + rng() % max_len;
  while (total < target) {
    const std::size_t len = std::min<std::size_t>(1 + rng() % 12, target - total);
    spans.push_back({rng() % 2 ? SpanKind::kImage : SpanKind::kText, len});
    total += len;
  }
  return spans;
}

// Per-cell rule evaluated from span membership.
bool oracle_cell(const std::vector<TokenSpan>& spans, std::size_t i, std::size_t j) {
  if (j <= i) return true;
  std::size_t start = 0;
  for (const auto& s : spans) {
    const std::size_t end = start + s.length;
    if (s.kind == SpanKind::kImage && i >= start && i < end && j >= start && j < end) return true;
    start = end;
  }
  return false;
}

std::vector<double> randv(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("mask examples") {
    const std::vector<TokenSpan> text{{SpanKind::kText, 4}};
    const auto m = build_hybrid_mask(text);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(m.at(i, j) == (j <= i));

    const std::vector<TokenSpan> mixed{{SpanKind::kText, 1}, {SpanKind::kImage, 2}, {SpanKind::kText, 1}};
    const auto h = build_hybrid_mask(mixed);
    auto row = [&](std::size_t i) {
      std::vector<std::size_t> r;
      for (std::size_t j = 0; j < 4; ++j)
        if (h.at(i, j)) r.push_back(j);
      return r;
    };
    CHECK(row(1) == std::vector<std::size_t>{0, 1, 2});
    CHECK(row(2) == std::vector<std::size_t>{0, 1, 2});
    CHECK(row(3) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(build_hybrid_mask({}).size() == 0);

    const std::vector<TokenSpan> image{{SpanKind::kImage, 5}};
    const auto all = build_hybrid_mask(image);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) CHECK(all.at(i, j));

    const std::vector<TokenSpan> bad{{SpanKind::kText, 0}};
    CHECK(error_code_of([&] { build_hybrid_mask(bad); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("mask matches the per-cell oracle on random layouts") {
    std::mt19937_64 rng(123);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const auto spans = random_layout(rng, 64);
      const auto m = build_hybrid_mask(spans);
      for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m.at(i, i));
        for (std::size_t j = 0; j < m.size(); ++j) mismatches += m.at(i, j) != oracle_cell(spans, i, j);
      }
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("interpolation") {
    std::mt19937_64 rng(1);
    const auto z0 = randv(rng, 33), z1 = randv(rng, 33);
    CHECK(interpolate(z0, z1, 0.0) == z0);
    CHECK(interpolate(z0, z1, 1.0) == z1);
    const std::vector<double> zeros(3, 0.0), twos(3, 2.0);
    CHECK(interpolate(zeros, twos, 0.5) == std::vector<double>(3, 1.0));
    for (double t : {0.1, 0.37, 0.9}) {
      const auto zt = interpolate(z0, z1, t);
      for (std::size_t k = 0; k < z0.size(); ++k) CHECK(zt[k] == doctest::Approx(z0[k] + t * (z1[k] - z0[k])));
    }
    const std::vector<double> short_v(2, 0.0);
    CHECK(error_code_of([&] { interpolate(z0, short_v, 0.5); }) == ErrorCode::kDimMismatch);
    CHECK(error_code_of([&] { interpolate(z0, z1, 1.5); }) == ErrorCode::kOutOfRange);
  }

  TEST_CASE("flow loss values and gradient") {
    std::mt19937_64 rng(2);
    const auto z0 = randv(rng, 17), z1 = randv(rng, 17);
    std::vector<double> v(17);
    for (std::size_t k = 0; k < 17; ++k) v[k] = z1[k] - z0[k];
    CHECK(flow_loss(v, z0, z1) == 0.0);
    for (auto& x : v) x += 1.0;
    CHECK(flow_loss(v, z0, z1) == doctest::Approx(1.0).epsilon(1e-14));

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + rng() % 40;
      const auto a = randv(rng, n), b = randv(rng, n);
      auto vp = randv(rng, n);
      const auto g = flow_loss_grad(vp, a, b);
      for (std::size_t k = 0; k < n; ++k) {
        const double h = 1e-5, keep = vp[k];
        vp[k] = keep + h;
        const double up = flow_loss(vp, a, b);
        vp[k] = keep - h;
        const double down = flow_loss(vp, a, b);
        vp[k] = keep;
        const double fd = (up - down) / (2 * h);
        worst = std::max(worst, std::fabs(fd - g[k]) / std::max(std::fabs(g[k]), 1e-8));
      }
    }
    CHECK(worst <= 1e-5);
  }

  TEST_CASE("timestep shift") {
    CHECK(shift_timestep(0.0, 3.0) == 0.0);
    CHECK(shift_timestep(1.0, 3.0) == 1.0);
    CHECK(shift_timestep(0.5, 3.0) == 0.25);
    for (int i = 0; i <= 1000; ++i) {
      const double u = i / 1000.0;
      CHECK(shift_timestep(u, 1.0) == doctest::Approx(u));
      CHECK(shift_timestep(u, 3.0) <= u);
      if (i > 0) CHECK(shift_timestep(u, 3.0) > shift_timestep((i - 1) / 1000.0, 3.0));
      CHECK(shift_timestep(u, 3.0, true) >= u);
    }
    CHECK(shift_timestep(0.5, 3.0, true) == 0.75);
  }

  TEST_CASE("cross entropy") {
    const std::vector<double> uniform(4 * 7, 0.3);
    const std::vector<std::int64_t> tg{0, 3, 6, 2};
    const std::vector<std::uint8_t> all{1, 1, 1, 1};
    CHECK(cross_entropy(uniform, 7, tg, all) == doctest::Approx(std::log(7.0)).epsilon(1e-14));

    double prev = INFINITY;
    for (double margin : {1.0, 5.0, 20.0, 60.0}) {
      std::vector<double> l(4 * 7, 0.0);
      for (std::size_t p = 0; p < 4; ++p) l[p * 7 + static_cast<std::size_t>(tg[p])] = margin;
      const double ce = cross_entropy(l, 7, tg, all);
      CHECK(ce < prev);
      prev = ce;
    }
    CHECK(prev < 1e-20);

    std::mt19937_64 rng(3);
    const auto logits = randv(rng, 4 * 7);
    const std::vector<std::uint8_t> first{1, 0, 0, 0}, rest{0, 1, 1, 1};
    const double a = cross_entropy(logits, 7, tg, first), b = cross_entropy(logits, 7, tg, rest);
    CHECK(cross_entropy(logits, 7, tg, all) == doctest::Approx((a + 3 * b) / 4).epsilon(1e-14));
    const std::vector<std::uint8_t> none{0, 0, 0, 0};
    CHECK(error_code_of([&] { cross_entropy(logits, 7, tg, none); }) == ErrorCode::kEmpty);
    const std::vector<double> huge{1000.0, 0.0};
    const std::vector<std::int64_t> t1{1};
    const std::vector<std::uint8_t> m1{1};
    CHECK(cross_entropy(huge, 2, t1, m1) == doctest::Approx(1000.0));
  }

  TEST_CASE("joint loss and config validation") {
    JointLossConfig cfg;
    CHECK(joint_loss(0.3, 0.2, cfg) == doctest::Approx(0.5));
    cfg.lambda_img = 0;
    CHECK(joint_loss(0.3, 0.2, cfg) == 0.3);
    cfg = {};
    cfg.lambda_text = 0;
    CHECK(joint_loss(0.3, 0.2, cfg) == 0.2);
    cfg = {};
    cfg.mu = 0.5;
    CHECK(error_code_of([&] { cfg.validate(); }) == ErrorCode::kConfig);
    cfg = {};
    cfg.ema_decay = 1.0;
    CHECK(error_code_of([&] { cfg.validate(); }) == ErrorCode::kConfig);
  }

  TEST_CASE("condition dropout") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) CHECK(cond_dropout(7, 0.0, rng) == 7);
    for (int i = 0; i < 100; ++i) CHECK_FALSE(cond_dropout(7, 1.0, rng));
    int dropped = 0;
    for (int i = 0; i < 10000; ++i) dropped += !cond_dropout(7, 0.3, rng);
    CHECK(std::fabs(dropped / 10000.0 - 0.3) <= 0.02);
  }

  TEST_CASE("learning-rate schedule") {
    const auto joint = ScheduleConfig::joint_phase();
    CHECK(lr_at(0, joint) == 0.0);
    CHECK(lr_at(100, joint) == doctest::Approx(5e-6));
    CHECK(std::fabs(lr_at(200, joint) - 1e-5) <= 1e-12);
    CHECK(std::fabs(lr_at(4000, joint) - 1e-6) <= 1e-12);
    CHECK(std::fabs(lr_at(2100, joint) - 5.5e-6) <= 1e-12);
    for (std::int64_t s = 201; s <= 4000; ++s) CHECK(lr_at(s, joint) <= lr_at(s - 1, joint));
    CHECK(std::fabs(lr_at(201, joint) - lr_at(200, joint)) < 1e-10);
    CHECK(error_code_of([&] { lr_at(4001, joint); }) == ErrorCode::kOutOfRange);
    CHECK(error_code_of([&] { lr_at(-1, joint); }) == ErrorCode::kOutOfRange);
    const auto warm = ScheduleConfig::warmup_phase();
    CHECK(std::fabs(lr_at(500, warm) - 2e-5) <= 1e-12);
    CHECK(std::fabs(lr_at(10000, warm) - 2e-6) <= 1e-12);
    ScheduleConfig bad = joint;
    bad.warmup_steps = 4000;
    CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::kConfig);
  }

  TEST_CASE("EMA") {
    std::vector<double> ema{1.0, 2.0};
    const std::vector<double> same{1.0, 2.0};
    ema_update(ema, same, 0.995);
    CHECK(ema == same);
    std::vector<double> zero{0.0};
    const std::vector<double> one{1.0};
    ema_update(zero, one, 0.995);
    CHECK(zero[0] == doctest::Approx(0.005).epsilon(1e-14));

    std::vector<double> e{3.0};
    const std::vector<double> p{-1.0};
    for (int k = 1; k <= 500; ++k) {
      ema_update(e, p, 0.995);
      CHECK(std::fabs(std::fabs(e[0] - p[0]) - std::pow(0.995, k) * 4.0) <= 1e-12);
    }
    std::vector<double> wrong(3);
    CHECK(error_code_of([&] { ema_update(wrong, p, 0.995); }) == ErrorCode::kDimMismatch);
  }

  TEST_CASE("selfcheck passes") {
    for (const auto& line : kernels_selfcheck()) {
      INFO(line.name << ": " << line.detail);
      CHECK(line.pass);
    }
  }
}
