// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "render/image.hpp"

namespace ivr {

/// Metric depth raster. Pixels with valid[i] == 0 carry no measurement.
struct DepthGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // meters, row-major
  std::vector<std::uint8_t> valid;

  static DepthGrid dense(int w, int h, std::vector<double> values);
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct BBox {
  int x = 0, y = 0, w = 0, h = 0;
  int label = 0;
};

inline constexpr int kBoxOutlinePx = 2;
inline constexpr Rgb kInvalidDepthColor{0, 0, 0};
inline constexpr Rgb kBoxColor{255, 255, 255};

struct ColorStop {
  double t;
  Rgb color;
};

/// Jet-like five-stop map from dark blue (near) through cyan, green, yellow to red (far).
inline constexpr std::array<ColorStop, 5> kDepthColormap{{
    {0.00, {0, 0, 128}},
    {0.25, {0, 255, 255}},
    {0.50, {0, 255, 0}},
    {0.75, {255, 255, 0}},
    {1.00, {255, 0, 0}},
}};

/// Piecewise-linear colormap lookup; channels rounded half-up. t is clamped to [0, 1].
Rgb colormap(double t);

/// Normalizes valid depths to [0, 1] by per-image min/max (t = 0 when flat),
/// colors them, paints invalid pixels black, then draws each box as a white
/// outline with its label index in the top-left corner.
/// Throws kEmptyValidRegion, or kInvalidArgument for an out-of-bounds box.
RgbImage depth_to_pseudocolor(const DepthGrid& depth, std::span<const BBox> boxes);

/// 16-bit grayscale PNG in millimeters (0 = invalid), or a raw grid: u32 LE
/// width, u32 LE height, then width*height f32 LE meters (non-finite or <= 0
/// invalid). The format is chosen by the ".png" extension.
DepthGrid load_depth(const std::filesystem::path& path);
DepthGrid decode_depth_raw(std::string_view bytes);
std::string encode_depth_raw(const DepthGrid& d);
DepthGrid depth_from_png16(const Gray16Image& img);

}  // namespace ivr
