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

#include "mlfd/geometry/pose.hpp"

namespace mlfd::geometry {

/// Axis-aligned pixel rectangle in continuous image coordinates, where pixel
/// (i, j) covers [i, i+1) x [j, j+1).
struct PixelBox {
  double u1 = 0.0;
  double v1 = 0.0;
  double u2 = 0.0;
  double v2 = 0.0;

  Vec2 center() const { return {0.5 * (u1 + u2), 0.5 * (v1 + v2)}; }
  double width() const { return u2 - u1; }
  double height() const { return v2 - v1; }
  bool valid() const { return u1 < u2 && v1 < v2; }
  // Same center, sides multiplied by factor.
  PixelBox scaled(double factor) const;
};

/// Eye-in-hand pinhole camera. The optical axis is +z of the camera frame,
/// x to the right, y down. hand_eye maps camera coordinates into the
/// end-effector frame.
struct CameraModel {
  double fx = 300.0;
  double fy = 300.0;
  double u0 = 160.0;
  double v0 = 120.0;
  int width = 320;
  int height = 240;
  Pose hand_eye;

  /// Throws InvariantViolation when intrinsics are inconsistent.
  void validate() const;

  Pose camera_pose(const Pose& ee_pose) const { return ee_pose * hand_eye; }

  // Default eye-in-hand rig: 320x240, camera 0.15 m behind the tool point.
  static CameraModel standard();
};

Vec2 project_point(const CameraModel& cam, const Vec3& p_cam);
Vec3 pixel_to_point(const CameraModel& cam, const Vec2& pixel, double depth);

struct GraspLabel {
  PixelBox box;
  double yaw = 0.0;  // (-pi, pi]
  Pose relative_pose;
};

struct SquareProjection {
  PixelBox box;
  bool out_of_view = false;
};

/// Projects a square of the given side, lying in the x-y plane of the grasp
/// frame and centred on the grasp position, into the camera attached to
/// ee_pose, and returns the axis-aligned hull of its four vertices.
SquareProjection grasp_square_to_bbox(const CameraModel& cam, const Pose& ee_pose,
                                      const Pose& grasp_pose, double side);

}  // namespace mlfd::geometry
