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

#include "mlfd/perception/detect.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlfd/common/error.hpp"

namespace mlfd::perception {
namespace {

double hue_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

double median(std::vector<float>& v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

}  // namespace

bool HueModel::matches(const Rgb& c) const {
  const Hsv hsv = to_hsv(c);
  return hsv.s >= min_saturation && hsv.v >= min_value &&
         hue_distance(hsv.h, hue_deg) <= hue_tolerance_deg;
}

HueModel fit_hue_model(const Image& image, const geometry::PixelBox& box,
                       const geometry::CameraModel& cam) {
  HueModel model;
  const int u1 = std::max(0, static_cast<int>(std::floor(box.u1)));
  const int v1 = std::max(0, static_cast<int>(std::floor(box.v1)));
  const int u2 = std::min(image.width, static_cast<int>(std::ceil(box.u2)));
  const int v2 = std::min(image.height, static_cast<int>(std::ceil(box.v2)));
  double sx = 0.0;
  double sy = 0.0;
  int n = 0;
  for (int v = v1; v < v2; ++v) {
    for (int u = u1; u < u2; ++u) {
      const Hsv hsv = to_hsv(image.at(u, v));
      if (hsv.s < model.min_saturation || hsv.v < model.min_value) continue;
      sx += std::cos(hsv.h * M_PI / 180.0);
      sy += std::sin(hsv.h * M_PI / 180.0);
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::kNoDetection, "no saturated pixel inside the target box");
  model.hue_deg = std::atan2(sy, sx) * 180.0 / M_PI;
  if (model.hue_deg < 0.0) model.hue_deg += 360.0;

  const Detection det = detect_target(image, model, cam);
  if (!det.none && det.median_depth > 0.0) {
    model.area_m2 = det.area * det.median_depth * det.median_depth / (cam.fx * cam.fy);
  }
  return model;
}

Detection detect_target(const Image& image, const HueModel& model, const geometry::CameraModel& cam) {
  const int w = image.width;
  const int h = image.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> mask(n);
  for (std::size_t i = 0; i < n; ++i) mask[i] = model.matches(image.pixels[i]) ? 1 : 0;

  std::vector<int> label(n, -1);
  std::vector<int> stack;
  std::vector<int> best_pixels;
  std::vector<int> pixels;
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!mask[s] || label[s] >= 0) continue;
    pixels.clear();
    stack.assign(1, static_cast<int>(s));
    label[s] = next;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      pixels.push_back(p);
      const int u = p % w;
      const int v = p / w;
      const int nb[4][2] = {{u - 1, v}, {u + 1, v}, {u, v - 1}, {u, v + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= w || q[1] < 0 || q[1] >= h) continue;
        const int j = q[1] * w + q[0];
        if (mask[static_cast<std::size_t>(j)] && label[static_cast<std::size_t>(j)] < 0) {
          label[static_cast<std::size_t>(j)] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
    if (pixels.size() > best_pixels.size()) best_pixels = pixels;
  }

  Detection det;
  const double min_pixels = model.min_fraction * static_cast<double>(n);
  if (best_pixels.empty() || static_cast<double>(best_pixels.size()) < min_pixels) return det;

  int u1 = w;
  int v1 = h;
  int u2 = -1;
  int v2 = -1;
  std::vector<float> depths;
  for (int p : best_pixels) {
    u1 = std::min(u1, p % w);
    u2 = std::max(u2, p % w);
    v1 = std::min(v1, p / w);
    v2 = std::max(v2, p / w);
    if (image.has_depth()) depths.push_back(image.depth[static_cast<std::size_t>(p)]);
  }
  det.none = false;
  det.box = {static_cast<double>(u1), static_cast<double>(v1), static_cast<double>(u2 + 1),
             static_cast<double>(v2 + 1)};
  det.area = static_cast<int>(best_pixels.size());
  det.median_depth = median(depths);
  if (model.area_m2 > 0.0 && det.median_depth > 0.0) {
    const double expected = model.area_m2 * cam.fx * cam.fy / (det.median_depth * det.median_depth);
    det.score = std::clamp(det.area / expected, 0.0, 1.0);
  } else {
    det.score = 1.0;
  }
  return det;
}

}  // namespace mlfd::perception
