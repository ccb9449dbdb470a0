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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mlfd::perception {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

static_assert(sizeof(Rgb) == 3);

/// 8-bit RGB raster with an optional per-pixel depth channel in meters.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;   // row-major
  std::vector<float> depth;  // empty or width * height

  Image() = default;
  Image(int w, int h, Rgb fill = {}, bool with_depth = false, float far = 0.0f);

  bool has_depth() const { return !depth.empty(); }
  const Rgb& at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
  Rgb& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
  float depth_at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
};

struct Hsv {
  double h = 0.0;  // degrees [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

Hsv to_hsv(const Rgb& c);

/// Lossless PNG; depth goes to a 16-bit grayscale sidecar in millimeters.
/// Throws IoError.
void write_png(const std::string& path, const Image& image);
void write_depth_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);
void read_depth_png(const std::string& path, Image& image);

}  // namespace mlfd::perception
