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

#include "mlfd/geometry/camera.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "mlfd/common/error.hpp"

namespace mlfd::geometry {

namespace {
constexpr double kMinDepth = 1e-6;
}

PixelBox PixelBox::scaled(double factor) const {
  const Vec2 c = center();
  const double hw = 0.5 * width() * factor;
  const double hh = 0.5 * height() * factor;
  return {c.x() - hw, c.y() - hh, c.x() + hw, c.y() + hh};
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::kInvariantViolation, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvariantViolation, "image size must be positive");
  }
  if (!(u0 >= 0.0 && u0 < width) || !(v0 >= 0.0 && v0 < height)) {
    throw Error(ErrorCode::kInvariantViolation, "principal point outside the image");
  }
}

CameraModel CameraModel::standard() {
  CameraModel cam;
  cam.hand_eye = Pose::from_translation(Vec3(0.0, 0.0, -0.15));
  return cam;
}

Vec2 project_point(const CameraModel& cam, const Vec3& p) {
  if (p.z() <= kMinDepth) {
    throw Error(ErrorCode::kNonPositiveDepth, "point at depth " + std::to_string(p.z()));
  }
  return {cam.fx * p.x() / p.z() + cam.u0, cam.fy * p.y() / p.z() + cam.v0};
}

Vec3 pixel_to_point(const CameraModel& cam, const Vec2& pixel, double depth) {
  if (depth <= kMinDepth) {
    throw Error(ErrorCode::kNonPositiveDepth, "depth " + std::to_string(depth));
  }
  return {(pixel.x() - cam.u0) * depth / cam.fx, (pixel.y() - cam.v0) * depth / cam.fy,
          depth};
}

SquareProjection grasp_square_to_bbox(const CameraModel& cam, const Pose& ee_pose,
                                      const Pose& grasp_pose, double side) {
  if (!(side > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "square side must be positive");
  }
  const Pose world_to_cam = cam.camera_pose(ee_pose).inverse();
  const double h = 0.5 * side;
  const std::array<Vec3, 4> corners = {Vec3(h, h, 0.0), Vec3(-h, h, 0.0), Vec3(-h, -h, 0.0),
                                       Vec3(h, -h, 0.0)};
  SquareProjection out;
  out.box = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec3& c : corners) {
    const Vec2 px = project_point(cam, world_to_cam * (grasp_pose * c));
    out.box.u1 = std::min(out.box.u1, px.x());
    out.box.v1 = std::min(out.box.v1, px.y());
    out.box.u2 = std::max(out.box.u2, px.x());
    out.box.v2 = std::max(out.box.v2, px.y());
  }
  out.out_of_view = out.box.u1 < 0.0 || out.box.v1 < 0.0 || out.box.u2 > cam.width ||
                    out.box.v2 > cam.height;
  return out;
}

}  // namespace mlfd::geometry
