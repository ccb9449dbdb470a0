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

#include "mlfd/geometry/camera.hpp"
#include "mlfd/perception/image.hpp"

namespace mlfd::perception {

/// Color statistics of the grasp target, learned from one labeled view.
struct HueModel {
  double hue_deg = 120.0;
  double hue_tolerance_deg = 15.0;
  double min_saturation = 0.25;
  double min_value = 0.1;
  // Target area times depth squared over fx * fy, i.e. the target's metric
  // area seen fronto-parallel. Zero disables scoring by size.
  double area_m2 = 0.0;
  double min_fraction = 0.001;  // of all pixels

  bool matches(const Rgb& c) const;
};

struct Detection {
  bool none = true;
  geometry::PixelBox box;
  double score = 0.0;
  int area = 0;              // component pixels
  double median_depth = 0.0; // over component pixels, 0 without depth
};

/// Circular mean hue of the saturated pixels inside box; the box should be
/// the target's ground-truth projection. Throws NoDetection if the box holds
/// no saturated pixel.
HueModel fit_hue_model(const Image& image, const geometry::PixelBox& box,
                       const geometry::CameraModel& cam);

/// Largest 4-connected component of matching pixels.
Detection detect_target(const Image& image, const HueModel& model, const geometry::CameraModel& cam);

}  // namespace mlfd::perception
