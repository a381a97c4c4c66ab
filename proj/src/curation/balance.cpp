// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "curation/balance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace ivr {
namespace {

constexpr double kTieEps = 1e-12;

std::vector<std::size_t> pick(std::size_t pool, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  shuffle(idx, rng);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

MixCounts choose_mix_counts(std::size_t interleaved_pool, std::size_t textual_pool, double target_ratio) {
  if (interleaved_pool == 0 || textual_pool == 0) fail(ErrorCode::kInsufficientPool, "both pools must be non-empty");
  if (!(target_ratio > 0.0 && target_ratio < 1.0)) fail(ErrorCode::kInvalidArgument, "target ratio must lie in (0, 1)");

  MixCounts best;
  double best_dev = INFINITY;
  auto consider = [&](std::size_t i, std::size_t t) {
    if (i + t == 0) return;
    const double dev = std::abs(static_cast<double>(i) / static_cast<double>(i + t) - target_ratio);
    const std::size_t total = i + t;
    const std::size_t best_total = best.interleaved + best.textual;
    bool better = dev < best_dev - kTieEps;
    if (!better && std::abs(dev - best_dev) <= kTieEps) {
      better = total > best_total || (total == best_total && i > best.interleaved);
    }
    if (better) {
      best = {i, t};
      best_dev = dev;
    }
  };
  for (std::size_t t = 0; t <= textual_pool; ++t) consider(interleaved_pool, t);
  for (std::size_t i = 0; i <= interleaved_pool; ++i) consider(i, textual_pool);
  return best;
}

MixSelection balance_mix(std::size_t interleaved_pool, std::size_t textual_pool, double target_ratio,
                         std::uint64_t seed) {
  MixSelection sel;
  sel.counts = choose_mix_counts(interleaved_pool, textual_pool, target_ratio);
  Rng rng(seed);
  sel.interleaved = pick(interleaved_pool, sel.counts.interleaved, rng);
  sel.textual = pick(textual_pool, sel.counts.textual, rng);
  return sel;
}

}  // namespace ivr
