// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "common/rng.hpp"

namespace ivr {

enum class SpanKind { kText, kImage };

struct TokenSpan {
  SpanKind kind = SpanKind::kText;
  std::size_t length = 1;
};

/// Row-major n x n; at(i, j) is true when query i may attend key j.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(std::size_t n) : n_(n), cells_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool at(std::size_t i, std::size_t j) const { return cells_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) { cells_[i * n_ + j] = v ? 1 : 0; }

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Causal everywhere, bidirectional inside each Image span. Throws
/// kInvalidArgument for a zero-length span.
AttentionMask build_hybrid_mask(std::span<const TokenSpan> spans);

/// t*z1 + (1-t)*z0. Throws kDimMismatch, kOutOfRange for t outside [0, 1].
std::vector<double> interpolate(std::span<const double> z0, std::span<const double> z1, double t);

/// Mean of (v - (z1 - z0))^2 over elements.
double flow_loss(std::span<const double> v_pred, std::span<const double> z0, std::span<const double> z1);
/// d flow_loss / d v_pred = 2 (v - (z1 - z0)) / N.
std::vector<double> flow_loss_grad(std::span<const double> v_pred, std::span<const double> z0,
                                   std::span<const double> z1);

/// u / (mu - (mu - 1) u). `reciprocal` selects mu u / (1 + (mu - 1) u).
double shift_timestep(double u, double mu, bool reciprocal = false);

/// Row-major logits [positions x vocab]. Mean of -log softmax(target) over
/// positions with mask != 0. Throws kEmpty when no position is unmasked.
double cross_entropy(std::span<const double> logits, std::size_t vocab, std::span<const std::int64_t> targets,
                     std::span<const std::uint8_t> mask);

struct JointLossConfig {
  double lambda_text = 1.0;
  double lambda_img = 1.0;
  double mu = 3.0;
  double dropout_p = 0.3;
  double ema_decay = 0.995;
  bool reciprocal_shift = false;

  void validate() const;
};

double joint_loss(double ce, double fl, const JointLossConfig& cfg);

/// Drops the condition with probability p using the supplied generator.
template <class T>
std::optional<T> cond_dropout(const T& c, double p, Rng& rng) {
  if (uniform01(rng) < p) return std::nullopt;
  return c;
}

struct ScheduleConfig {
  double peak_lr = 1e-5;
  double min_lr = 1e-6;
  std::int64_t total_steps = 4000;
  std::int64_t warmup_steps = 200;

  void validate() const;
  static ScheduleConfig joint_phase() { return {}; }
  static ScheduleConfig warmup_phase() { return {2e-5, 2e-6, 10000, 500}; }
};

/// Linear warmup from 0 to peak, then cosine decay to min. Throws kOutOfRange
/// for step outside [0, total_steps].
double lr_at(std::int64_t step, const ScheduleConfig& cfg);

/// decay * ema + (1 - decay) * params, elementwise.
void ema_update(std::span<double> ema, std::span<const double> params, double decay);

struct SelfcheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

/// Property suite over the kernels with fixed seeds.
std::vector<SelfcheckLine> kernels_selfcheck(std::uint64_t seed = 20260101);

}  // namespace ivr
