// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <string>

#include "common/error.hpp"
#include "numerics/kernels.hpp"

namespace ivr {
namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> normal_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * uniform01(rng) - 1.0;
  return v;
}

std::vector<TokenSpan> random_layout(Rng& rng, std::size_t max_len) {
  std::vector<TokenSpan> spans;
  std::size_t used = 0;
  const std::size_t target = 1 + uniform_below(rng, max_len);
  while (used < target) {
    const std::size_t len = 1 + uniform_below(rng, std::min<std::size_t>(target - used, 12));
    spans.push_back({uniform01(rng) < 0.5 ? SpanKind::kText : SpanKind::kImage, len});
    used += len;
  }
  return spans;
}

bool mask_rule(const std::vector<TokenSpan>& spans, std::size_t i, std::size_t j) {
  if (j <= i) return true;
  std::size_t begin = 0;
  for (const auto& s : spans) {
    const std::size_t end = begin + s.length;
    if (i >= begin && i < end) return s.kind == SpanKind::kImage && j >= begin && j < end;
    begin = end;
  }
  return false;
}

}  // namespace

std::vector<SelfcheckLine> kernels_selfcheck(std::uint64_t seed) {
  std::vector<SelfcheckLine> out;
  Rng rng(seed);

  {
    std::size_t bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
      auto spans = random_layout(rng, 64);
      auto m = build_hybrid_mask(spans);
      for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) bad += m.at(i, j) != mask_rule(spans, i, j);
      }
    }
    std::vector<TokenSpan> text{{SpanKind::kText, 7}, {SpanKind::kText, 5}};
    auto m = build_hybrid_mask(text);
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m.size(); ++j) bad += m.at(i, j) != (j <= i);
    }
    out.push_back({"hybrid_mask", bad == 0, std::to_string(bad) + " disagreeing cells"});
  }

  {
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
      auto z0 = normal_vec(rng, 9), z1 = normal_vec(rng, 9);
      ok = ok && interpolate(z0, z1, 0.0) == z0 && interpolate(z0, z1, 1.0) == z1;
      const double t = uniform01(rng);
      auto zt = interpolate(z0, z1, t);
      for (std::size_t k = 0; k < zt.size(); ++k) ok = ok && std::abs(zt[k] - (z0[k] + t * (z1[k] - z0[k]))) <= 1e-12;
    }
    out.push_back({"interpolate", ok, "endpoints exact, affine in t"});
  }

  {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + uniform_below(rng, 16);
      auto v = normal_vec(rng, n), z0 = normal_vec(rng, n), z1 = normal_vec(rng, n);
      auto g = flow_loss_grad(v, z0, z1);
      const double h = 1e-5;
      for (std::size_t k = 0; k < n; ++k) {
        auto vp = v, vm = v;
        vp[k] += h;
        vm[k] -= h;
        const double fd = (flow_loss(vp, z0, z1) - flow_loss(vm, z0, z1)) / (2 * h);
        const double denom = std::max({std::abs(g[k]), std::abs(fd), 1e-12});
        worst = std::max(worst, std::abs(g[k] - fd) / denom);
      }
    }
    std::vector<double> z0{0.5, -1.0, 2.0}, z1{1.5, 3.0, -2.0}, v{2.0, 5.0, -3.0};
    const bool unit = flow_loss(v, z0, z1) == 1.0;
    out.push_back({"flow_loss_gradient", worst <= 1e-5 && unit, fmt("max relative error %.3g", worst)});
  }

  {
    bool ok = shift_timestep(0.5, 3.0) == 0.25 && shift_timestep(0.0, 3.0) == 0.0 && shift_timestep(1.0, 3.0) == 1.0;
    double prev = -1.0;
    for (int k = 0; k <= 1000; ++k) {
      const double u = k / 1000.0;
      const double t = shift_timestep(u, 3.0);
      ok = ok && t <= u && t > prev && shift_timestep(u, 1.0) == u;
      prev = t;
    }
    out.push_back({"shift_timestep", ok, "endpoints fixed, t <= u, increasing"});
  }

  {
    const std::size_t vocab = 7, pos = 5;
    std::vector<double> logits(pos * vocab, 0.25);
    std::vector<std::int64_t> tgt{0, 3, 6, 2, 1};
    std::vector<std::uint8_t> mask(pos, 1);
    const double uniform = cross_entropy(logits, vocab, tgt, mask);
    auto rand_logits = normal_vec(rng, pos * vocab);
    std::vector<std::uint8_t> m2 = mask;
    m2[2] = 0;
    const double full = cross_entropy(rand_logits, vocab, tgt, mask);
    const double part = cross_entropy(rand_logits, vocab, tgt, m2);
    std::vector<std::uint8_t> only{0, 0, 1, 0, 0};
    const double third = cross_entropy(rand_logits, vocab, tgt, only);
    const bool ok = std::abs(uniform - std::log(7.0)) <= 1e-12 && std::abs(full * 5 - (part * 4 + third)) <= 1e-12;
    out.push_back({"cross_entropy", ok, fmt("uniform loss %.12f", uniform)});
  }

  {
    JointLossConfig cfg;
    bool ok = std::abs(joint_loss(0.3, 0.2, cfg) - 0.5) <= 1e-15;
    cfg.lambda_img = 0.0;
    ok = ok && joint_loss(0.3, 0.2, cfg) == 0.3;
    cfg.lambda_img = 1.0;
    cfg.lambda_text = 0.0;
    ok = ok && joint_loss(0.3, 0.2, cfg) == 0.2;
    out.push_back({"joint_loss", ok, "weighted sum"});
  }

  {
    Rng drop(seed ^ 0x5eedULL);
    int nulls = 0;
    for (int k = 0; k < 10000; ++k) nulls += !cond_dropout(1, 0.3, drop).has_value();
    bool ok = std::abs(nulls / 10000.0 - 0.3) <= 0.02;
    for (int k = 0; k < 100; ++k) ok = ok && cond_dropout(1, 0.0, drop).has_value() && !cond_dropout(1, 1.0, drop);
    out.push_back({"cond_dropout", ok, fmt("null fraction %.4f", nulls / 10000.0)});
  }

  {
    const auto cfg = ScheduleConfig::joint_phase();
    bool ok = std::abs(lr_at(200, cfg) - 1e-5) <= 1e-12 && std::abs(lr_at(4000, cfg) - 1e-6) <= 1e-12 &&
              std::abs(lr_at(2100, cfg) - 5.5e-6) <= 1e-12 && lr_at(0, cfg) == 0.0;
    for (std::int64_t s = 201; s <= 4000; ++s) ok = ok && lr_at(s, cfg) <= lr_at(s - 1, cfg);
    out.push_back({"lr_schedule", ok, "warmup peak, cosine floor, midpoint"});
  }

  {
    const double d = 0.995;
    std::vector<double> ema{0.0}, params{1.0};
    ema_update(ema, params, d);
    bool ok = std::abs(ema[0] - 0.005) <= 1e-15;
    std::vector<double> e{3.0}, p{-1.0};
    double worst = 0.0;
    for (int k = 1; k <= 500; ++k) {
      ema_update(e, p, d);
      worst = std::max(worst, std::abs(std::abs(e[0] - p[0]) - std::pow(d, k) * 4.0));
    }
    ok = ok && worst <= 1e-12;
    out.push_back({"ema_update", ok, fmt("max deviation from closed form %.3g", worst)});
  }
  return out;
}

}  // namespace ivr
