// Copyright 2026 The mechanism-lfd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mlfd/perception/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "mlfd/common/error.hpp"

namespace mlfd::perception {

Image::Image(int w, int h, Rgb fill, bool with_depth, float far)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
  if (with_depth) depth.assign(static_cast<std::size_t>(w) * h, far);
}

Hsv to_hsv(const Rgb& c) {
  const double r = c.r / 255.0;
  const double g = c.g / 255.0;
  const double b = c.b / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) return out;
  double h;
  if (mx == r) {
    h = std::fmod((g - b) / d, 6.0);
  } else if (mx == g) {
    h = (b - r) / d + 2.0;
  } else {
    h = (r - g) / d + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  out.h = h;
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Errors surface as exceptions after the longjmp; keep libpng quiet.
[[noreturn]] void png_error_silent(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void png_warning_silent(png_structp, png_const_charp) {}

void write_rows(const std::string& path, int width, int height, int color_type, int bit_depth,
                const std::vector<png_bytep>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::kIoError, "cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_silent, png_warning_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "png write failed for " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // rows are host (little-endian) order
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Reads a PNG into 8-bit RGB or 16-bit gray rows.
std::vector<std::uint8_t> read_raw(const std::string& path, bool want_gray16, int& width,
                                   int& height) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::kIoError, "cannot read " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_silent, png_warning_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIoError, "png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIoError, "png read failed for " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (want_gray16) {
    if (color != PNG_COLOR_TYPE_GRAY || depth != 16) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw Error(ErrorCode::kIoError, path + " is not a 16-bit grayscale depth image");
    }
    png_set_swap(png);
  } else {
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  std::vector<std::uint8_t> data(stride * static_cast<std::size_t>(height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int v = 0; v < height; ++v) rows[static_cast<std::size_t>(v)] = data.data() + stride * v;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return data;
}

}  // namespace

void write_png(const std::string& path, const Image& image) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  auto* base = reinterpret_cast<png_bytep>(const_cast<Rgb*>(image.pixels.data()));
  for (int v = 0; v < image.height; ++v) {
    rows[static_cast<std::size_t>(v)] = base + static_cast<std::size_t>(v) * image.width * 3;
  }
  write_rows(path, image.width, image.height, PNG_COLOR_TYPE_RGB, 8, rows);
}

void write_depth_png(const std::string& path, const Image& image) {
  if (!image.has_depth()) throw Error(ErrorCode::kInvalidArgument, "image has no depth channel");
  std::vector<std::uint16_t> mm(image.depth.size());
  for (std::size_t i = 0; i < mm.size(); ++i) {
    mm[i] = static_cast<std::uint16_t>(std::clamp(std::lround(image.depth[i] * 1000.0), 0L, 65535L));
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (int v = 0; v < image.height; ++v) {
    rows[static_cast<std::size_t>(v)] =
        reinterpret_cast<png_bytep>(mm.data() + static_cast<std::size_t>(v) * image.width);
  }
  write_rows(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, 16, rows);
}

Image read_png(const std::string& path) {
  int w = 0;
  int h = 0;
  const std::vector<std::uint8_t> data = read_raw(path, false, w, h);
  Image img(w, h);
  std::copy(data.begin(), data.end(), reinterpret_cast<std::uint8_t*>(img.pixels.data()));
  return img;
}

void read_depth_png(const std::string& path, Image& image) {
  int w = 0;
  int h = 0;
  const std::vector<std::uint8_t> data = read_raw(path, true, w, h);
  if (w != image.width || h != image.height) {
    throw Error(ErrorCode::kIoError, "depth sidecar size differs from the image");
  }
  image.depth.resize(static_cast<std::size_t>(w) * h);
  const auto* mm = reinterpret_cast<const std::uint16_t*>(data.data());
  for (std::size_t i = 0; i < image.depth.size(); ++i) image.depth[i] = mm[i] / 1000.0f;
}

}  // namespace mlfd::perception
