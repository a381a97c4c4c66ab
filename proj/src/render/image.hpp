// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ivr {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}
  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// 16-bit grayscale raster.
struct Gray16Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;
};

struct ImageInfo {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;
};

std::string encode_png(const RgbImage& img);
std::string encode_png(const Gray16Image& img);
RgbImage decode_png_rgb(std::string_view bytes);
Gray16Image decode_png_gray16(std::string_view bytes);
ImageInfo probe_png(std::string_view bytes);

}  // namespace ivr
