// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "numerics/kernels.hpp"

#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace ivr {
namespace {

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) fail(ErrorCode::kDimMismatch, "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

AttentionMask build_hybrid_mask(std::span<const TokenSpan> spans) {
  std::size_t n = 0;
  for (const auto& s : spans) {
    if (s.length == 0) fail(ErrorCode::kInvalidArgument, "token span length must be >= 1");
    n += s.length;
  }
  AttentionMask m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, true);
  }
  std::size_t begin = 0;
  for (const auto& s : spans) {
    if (s.kind == SpanKind::kImage) {
      for (std::size_t i = begin; i < begin + s.length; ++i) {
        for (std::size_t j = begin; j < begin + s.length; ++j) m.set(i, j, true);
      }
    }
    begin += s.length;
  }
  return m;
}

std::vector<double> interpolate(std::span<const double> z0, std::span<const double> z1, double t) {
  check_dims(z0.size(), z1.size());
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::kOutOfRange, "t must lie in [0, 1]");
  std::vector<double> out(z0.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (t == 0.0) {
      out[k] = z0[k];
    } else if (t == 1.0) {
      out[k] = z1[k];
    } else {
      out[k] = t * z1[k] + (1.0 - t) * z0[k];
    }
  }
  return out;
}

double flow_loss(std::span<const double> v_pred, std::span<const double> z0, std::span<const double> z1) {
  check_dims(v_pred.size(), z0.size());
  check_dims(z0.size(), z1.size());
  if (v_pred.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < v_pred.size(); ++k) {
    const double d = v_pred[k] - (z1[k] - z0[k]);
    acc += d * d;
  }
  return acc / static_cast<double>(v_pred.size());
}

std::vector<double> flow_loss_grad(std::span<const double> v_pred, std::span<const double> z0,
                                   std::span<const double> z1) {
  check_dims(v_pred.size(), z0.size());
  check_dims(z0.size(), z1.size());
  std::vector<double> g(v_pred.size());
  const double n = static_cast<double>(v_pred.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = 2.0 * (v_pred[k] - (z1[k] - z0[k])) / n;
  return g;
}

double shift_timestep(double u, double mu, bool reciprocal) {
  if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::kOutOfRange, "u must lie in [0, 1]");
  if (!(mu >= 1.0)) fail(ErrorCode::kInvalidArgument, "mu must be >= 1");
  if (reciprocal) return mu * u / (1.0 + (mu - 1.0) * u);
  return u / (mu - (mu - 1.0) * u);
}

double cross_entropy(std::span<const double> logits, std::size_t vocab, std::span<const std::int64_t> targets,
                     std::span<const std::uint8_t> mask) {
  if (vocab == 0) fail(ErrorCode::kInvalidArgument, "vocabulary must be non-empty");
  check_dims(logits.size(), targets.size() * vocab);
  check_dims(targets.size(), mask.size());
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < targets.size(); ++p) {
    if (!mask[p]) continue;
    const auto tgt = targets[p];
    if (tgt < 0 || static_cast<std::size_t>(tgt) >= vocab) fail(ErrorCode::kOutOfRange, "target outside vocabulary");
    const double* row = logits.data() + p * vocab;
    double mx = row[0];
    for (std::size_t v = 1; v < vocab; ++v) mx = std::max(mx, row[v]);
    double sum = 0.0;
    for (std::size_t v = 0; v < vocab; ++v) sum += std::exp(row[v] - mx);
    total += -(row[tgt] - mx - std::log(sum));
    ++count;
  }
  if (count == 0) fail(ErrorCode::kEmpty, "EmptyMask: no unmasked position");
  return total / static_cast<double>(count);
}

void JointLossConfig::validate() const {
  if (!(lambda_text >= 0.0) || !(lambda_img >= 0.0)) fail(ErrorCode::kConfig, "loss weights must be >= 0");
  if (!(mu >= 1.0)) fail(ErrorCode::kConfig, "timestep shift mu must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p <= 1.0)) fail(ErrorCode::kConfig, "dropout_p must lie in [0, 1]");
  if (!(ema_decay > 0.0 && ema_decay < 1.0)) fail(ErrorCode::kConfig, "ema_decay must lie in (0, 1)");
}

double joint_loss(double ce, double fl, const JointLossConfig& cfg) {
  double out = 0.0;
  if (cfg.lambda_text != 0.0) out += cfg.lambda_text * ce;
  if (cfg.lambda_img != 0.0) out += cfg.lambda_img * fl;
  return out;
}

void ScheduleConfig::validate() const {
  if (!(min_lr > 0.0 && min_lr <= peak_lr)) fail(ErrorCode::kConfig, "schedule needs 0 < min_lr <= peak_lr");
  if (!(warmup_steps >= 0 && warmup_steps < total_steps)) {
    fail(ErrorCode::kConfig, "schedule needs 0 <= warmup_steps < total_steps");
  }
}

double lr_at(std::int64_t step, const ScheduleConfig& cfg) {
  cfg.validate();
  if (step < 0 || step > cfg.total_steps) {
    fail(ErrorCode::kOutOfRange, "step " + std::to_string(step) + " outside [0, " + std::to_string(cfg.total_steps) + "]");
  }
  if (step < cfg.warmup_steps) {
    return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  }
  const double progress =
      static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.min_lr + 0.5 * (cfg.peak_lr - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

void ema_update(std::span<double> ema, std::span<const double> params, double decay) {
  check_dims(ema.size(), params.size());
  for (std::size_t k = 0; k < ema.size(); ++k) ema[k] = decay * ema[k] + (1.0 - decay) * params[k];
}

}  // namespace ivr
