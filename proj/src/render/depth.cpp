// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "render/depth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "common/error.hpp"
#include "common/jsonl.hpp"

namespace ivr {
namespace {

// 3x5 bitmap digits, one row per entry, bit 2 = leftmost column.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigitGlyphs{{
    {0b111, 0b101, 0b101, 0b101, 0b111},
    {0b010, 0b110, 0b010, 0b010, 0b111},
    {0b111, 0b001, 0b111, 0b100, 0b111},
    {0b111, 0b001, 0b111, 0b001, 0b111},
    {0b101, 0b101, 0b111, 0b001, 0b001},
    {0b111, 0b100, 0b111, 0b001, 0b111},
    {0b111, 0b100, 0b111, 0b101, 0b111},
    {0b111, 0b001, 0b010, 0b010, 0b010},
    {0b111, 0b101, 0b111, 0b101, 0b111},
    {0b111, 0b101, 0b111, 0b001, 0b111},
}};

std::uint8_t lerp_channel(std::uint8_t a, std::uint8_t b, double f) {
  const double v = static_cast<double>(a) + f * (static_cast<double>(b) - static_cast<double>(a));
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

void draw_label(RgbImage& img, const BBox& box) {
  const std::string digits = std::to_string(box.label);
  const int ox = box.x + kBoxOutlinePx;
  const int oy = box.y + kBoxOutlinePx;
  const int pad_w = static_cast<int>(digits.size()) * 4 + 1;
  // clipped to the box interior
  const int x_end = std::min(ox + pad_w, box.x + box.w - kBoxOutlinePx);
  const int y_end = std::min(oy + 7, box.y + box.h - kBoxOutlinePx);
  for (int y = oy; y < y_end; ++y) {
    for (int x = ox; x < x_end; ++x) img.at(x, y) = {0, 0, 0};
  }
  for (std::size_t d = 0; d < digits.size(); ++d) {
    const auto& glyph = kDigitGlyphs[static_cast<std::size_t>(digits[d] - '0')];
    for (int gy = 0; gy < 5; ++gy) {
      for (int gx = 0; gx < 3; ++gx) {
        if (!(glyph[static_cast<std::size_t>(gy)] & (0b100 >> gx))) continue;
        const int x = ox + 1 + static_cast<int>(d) * 4 + gx;
        const int y = oy + 1 + gy;
        if (x < x_end && y < y_end) img.at(x, y) = kBoxColor;
      }
    }
  }
}

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

DepthGrid DepthGrid::dense(int w, int h, std::vector<double> values) {
  DepthGrid d;
  d.width = w;
  d.height = h;
  d.valid.assign(values.size(), 1);
  d.values = std::move(values);
  return d;
}

Rgb colormap(double t) {
  t = std::clamp(t, 0.0, 1.0);
  for (std::size_t k = 0; k + 1 < kDepthColormap.size(); ++k) {
    const auto& lo = kDepthColormap[k];
    const auto& hi = kDepthColormap[k + 1];
    if (t <= hi.t) {
      const double f = (t - lo.t) / (hi.t - lo.t);
      return {lerp_channel(lo.color.r, hi.color.r, f), lerp_channel(lo.color.g, hi.color.g, f),
              lerp_channel(lo.color.b, hi.color.b, f)};
    }
  }
  return kDepthColormap.back().color;
}

RgbImage depth_to_pseudocolor(const DepthGrid& depth, std::span<const BBox> boxes) {
  const std::size_t n = static_cast<std::size_t>(depth.width) * static_cast<std::size_t>(depth.height);
  if (depth.width <= 0 || depth.height <= 0 || depth.values.size() != n || depth.valid.size() != n) {
    fail(ErrorCode::kInvalidArgument, "depth grid shape mismatch");
  }
  for (const auto& b : boxes) {
    if (b.w <= 0 || b.h <= 0 || b.x < 0 || b.y < 0 || b.x + b.w > depth.width || b.y + b.h > depth.height) {
      fail(ErrorCode::kInvalidArgument, "bounding box outside image");
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!depth.valid[i]) continue;
    if (!std::isfinite(depth.values[i])) fail(ErrorCode::kInvalidArgument, "non-finite depth marked valid");
    lo = std::min(lo, depth.values[i]);
    hi = std::max(hi, depth.values[i]);
  }
  if (lo > hi) fail(ErrorCode::kEmptyValidRegion, "depth grid has no valid pixels");

  RgbImage img(depth.width, depth.height);
  const double span = hi - lo;
  for (std::size_t i = 0; i < n; ++i) {
    if (!depth.valid[i]) {
      img.pixels[i] = kInvalidDepthColor;
      continue;
    }
    const double t = span > 0.0 ? (depth.values[i] - lo) / span : 0.0;
    img.pixels[i] = colormap(t);
  }
  for (const auto& b : boxes) {
    for (int y = b.y; y < b.y + b.h; ++y) {
      for (int x = b.x; x < b.x + b.w; ++x) {
        const bool edge = x < b.x + kBoxOutlinePx || x >= b.x + b.w - kBoxOutlinePx || y < b.y + kBoxOutlinePx ||
                          y >= b.y + b.h - kBoxOutlinePx;
        if (edge) img.at(x, y) = kBoxColor;
      }
    }
    draw_label(img, b);
  }
  return img;
}

DepthGrid depth_from_png16(const Gray16Image& img) {
  DepthGrid d;
  d.width = img.width;
  d.height = img.height;
  d.values.resize(img.pixels.size());
  d.valid.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    d.valid[i] = img.pixels[i] != 0;
    d.values[i] = static_cast<double>(img.pixels[i]) / 1000.0;
  }
  return d;
}

DepthGrid decode_depth_raw(std::string_view bytes) {
  if (bytes.size() < 8) fail(ErrorCode::kParse, "raw depth grid shorter than its header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t w = read_u32le(p);
  const std::uint32_t h = read_u32le(p + 4);
  const std::uint64_t n = static_cast<std::uint64_t>(w) * h;
  if (w == 0 || h == 0 || bytes.size() != 8 + 4 * n) fail(ErrorCode::kParse, "raw depth grid size mismatch");
  DepthGrid d;
  d.width = static_cast<int>(w);
  d.height = static_cast<int>(h);
  d.values.resize(n);
  d.valid.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const float f = std::bit_cast<float>(read_u32le(p + 8 + 4 * i));
    d.valid[i] = std::isfinite(f) && f > 0.0f;
    d.values[i] = static_cast<double>(f);
  }
  return d;
}

std::string encode_depth_raw(const DepthGrid& d) {
  std::string out;
  out.reserve(8 + 4 * d.values.size());
  write_u32le(out, static_cast<std::uint32_t>(d.width));
  write_u32le(out, static_cast<std::uint32_t>(d.height));
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const float f = d.valid[i] ? static_cast<float>(d.values[i]) : 0.0f;
    write_u32le(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

DepthGrid load_depth(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return depth_from_png16(decode_png_gray16(bytes));
  return decode_depth_raw(bytes);
}

}  // namespace ivr
