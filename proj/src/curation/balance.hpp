// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ivr {

inline constexpr double kDefaultInterleavedRatio = 0.4786;

struct MixCounts {
  std::size_t interleaved = 0;
  std::size_t textual = 0;

  friend bool operator==(const MixCounts&, const MixCounts&) = default;
};

/// Counts that exhaust at least one pool while landing as close as possible to
/// the target interleaved fraction; ties prefer the larger total, then more
/// interleaved samples. Throws kInsufficientPool / kInvalidArgument.
MixCounts choose_mix_counts(std::size_t interleaved_pool, std::size_t textual_pool, double target_ratio);

struct MixSelection {
  MixCounts counts;
  std::vector<std::size_t> interleaved;  // ascending pool indices
  std::vector<std::size_t> textual;
};

/// Picks which pool members fill the chosen counts with a seeded shuffle.
/// Pure in (pool sizes, target, seed).
MixSelection balance_mix(std::size_t interleaved_pool, std::size_t textual_pool, double target_ratio,
                         std::uint64_t seed);

}  // namespace ivr
