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

#include <vector>

#include "mlfd/common/random.hpp"
#include "mlfd/geometry/camera.hpp"
#include "mlfd/mechanism/model.hpp"
#include "mlfd/perception/image.hpp"

namespace mlfd::perception {

using geometry::Pose;
using geometry::Vec3;

struct Primitive {
  enum class Kind { kBox, kSphere };
  Kind kind = Kind::kBox;
  Pose pose;              // center and orientation
  Vec3 half_extents{0, 0, 0};  // boxes
  double radius = 0.0;    // spheres
  Rgb color;
};

struct Scene {
  std::vector<Primitive> primitives;
  bool table = true;  // plane z = 0
  Rgb table_color{170, 160, 150};
  Rgb background{200, 200, 205};
  // Scene-wide contrast in (0, 1]; lower values wash colors toward mid grey.
  double light = 1.0;
};

inline constexpr float kFarDepth = 10.0f;

/// Mechanism body plus the graspable knob: a square plate of object_width
/// whose top face is the handle frame, with a dark strip toward handle +x.
/// degraded selects the low-contrast target color.
Scene scene_for_mechanism(const mechanism::MechanismModel& model, const Pose& handle_pose,
                          bool degraded = false);

/// Adds count colored clutter objects on the table, keeping clear of the
/// mechanism footprint. Colors avoid the green target hue.
void add_distractors(Scene& scene, const mechanism::MechanismModel& model, Rng& rng, int count);

/// Pinhole ray caster; depth is the camera-frame z of the first hit.
Image render(const Scene& scene, const geometry::CameraModel& cam, const Pose& camera_pose);

}  // namespace mlfd::perception
