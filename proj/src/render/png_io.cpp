// Copyright 2026 The IVR Authors
// SPDX-License-Identifier: Apache-2.0

#include <png.h>

#include <cstring>
#include <memory>

#include "common/error.hpp"
#include "render/image.hpp"

namespace ivr {
namespace {

struct ReadCursor {
  std::string_view bytes;
  std::size_t pos = 0;
};

void on_png_error(png_structp, png_const_charp msg) { throw Error(ErrorCode::kParse, std::string("png: ") + msg); }
void on_png_warning(png_structp, png_const_charp) {}

void read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->bytes.size()) png_error(png, "truncated data");
  std::memcpy(out, cur->bytes.data() + cur->pos, n);
  cur->pos += n;
}

void write_to_string(png_structp png, png_bytep data, png_size_t n) {
  static_cast<std::string*>(png_get_io_ptr(png))->append(reinterpret_cast<const char*>(data), n);
}

void flush_noop(png_structp) {}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : cursor_{bytes} {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
      fail(ErrorCode::kParse, "not a PNG stream");
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
    info_ = png_create_info_struct(png_);
    png_set_read_fn(png_, &cursor_, read_from_memory);
    png_read_info(png_, info_);
  }
  ~Reader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  png_structp png() { return png_; }
  png_infop info() { return info_; }

  ImageInfo header() {
    return {static_cast<int>(png_get_image_width(png_, info_)), static_cast<int>(png_get_image_height(png_, info_)),
            png_get_bit_depth(png_, info_), png_get_channels(png_, info_)};
  }

  std::vector<png_byte> read_rows(int& width, int& height, std::size_t& stride) {
    png_read_update_info(png_, info_);
    width = static_cast<int>(png_get_image_width(png_, info_));
    height = static_cast<int>(png_get_image_height(png_, info_));
    stride = png_get_rowbytes(png_, info_);
    std::vector<png_byte> data(stride * static_cast<std::size_t>(height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = data.data() + stride * y;
    png_read_image(png_, rows.data());
    return data;
  }

 private:
  ReadCursor cursor_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

std::string write_png(int width, int height, int bit_depth, int color_type, const std::vector<png_bytep>& rows) {
  std::string out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
  png_infop info = png_create_info_struct(png);
  try {
    png_set_write_fn(png, &out, write_to_string, flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

std::string encode_png(const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0) fail(ErrorCode::kInvalidArgument, "empty image");
  static_assert(sizeof(Rgb) == 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  auto* base = reinterpret_cast<png_bytep>(const_cast<Rgb*>(img.pixels.data()));
  for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = base + static_cast<std::size_t>(y) * img.width * 3;
  return write_png(img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

std::string encode_png(const Gray16Image& img) {
  if (img.width <= 0 || img.height <= 0) fail(ErrorCode::kInvalidArgument, "empty image");
  // PNG stores 16-bit samples big-endian.
  std::vector<png_byte> be(img.pixels.size() * 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    be[2 * i] = static_cast<png_byte>(img.pixels[i] >> 8);
    be[2 * i + 1] = static_cast<png_byte>(img.pixels[i] & 0xFF);
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = be.data() + static_cast<std::size_t>(y) * img.width * 2;
  return write_png(img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

ImageInfo probe_png(std::string_view bytes) {
  Reader r(bytes);
  return r.header();
}

RgbImage decode_png_rgb(std::string_view bytes) {
  Reader r(bytes);
  png_structp png = r.png();
  png_infop info = r.info();
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  int w = 0, h = 0;
  std::size_t stride = 0;
  auto data = r.read_rows(w, h, stride);
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const png_byte* p = data.data() + stride * y + 3 * x;
      img.at(x, y) = {p[0], p[1], p[2]};
    }
  }
  return img;
}

Gray16Image decode_png_gray16(std::string_view bytes) {
  Reader r(bytes);
  png_structp png = r.png();
  png_infop info = r.info();
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) fail(ErrorCode::kParse, "depth PNG must be single-channel grayscale");
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  int w = 0, h = 0;
  std::size_t stride = 0;
  auto data = r.read_rows(w, h, stride);
  Gray16Image img{w, h, std::vector<std::uint16_t>(static_cast<std::size_t>(w) * h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const png_byte* row = data.data() + stride * y;
      img.pixels[static_cast<std::size_t>(y) * w + x] =
          depth == 16 ? static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]) : row[x];
    }
  }
  return img;
}

}  // namespace ivr
