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

#include "mlfd/geometry/pose.hpp"

#include <cmath>
#include <numbers>

#include "mlfd/common/error.hpp"

namespace mlfd::geometry {

namespace {

constexpr double kYawOnlyTolerance = 1e-3;

Quat normalized(const Quat& q) {
  Quat out = q.normalized();
  // Keep a canonical hemisphere so equal rotations compare equal.
  if (out.w() < 0.0) out.coeffs() *= -1.0;
  return out;
}

}  // namespace

Pose::Pose(const Quat& rotation, const Vec3& translation)
    : rotation_(normalized(rotation)), translation_(translation) {}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(normalized(Quat(rotation))), translation_(translation) {}

Pose Pose::from_axis_angle(const Vec3& axis, double angle, const Vec3& translation) {
  return Pose(Quat(Eigen::AngleAxisd(angle, axis.normalized())), translation);
}

Pose Pose::from_yaw(double yaw, const Vec3& translation) {
  return from_axis_angle(Vec3::UnitZ(), yaw, translation);
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(rotation_ * other.rotation_, rotation_ * other.translation_ + translation_);
}

Pose Pose::inverse() const {
  const Quat inv = rotation_.conjugate();
  return Pose(inv, -(inv * translation_));
}

Pose relative_pose(const Pose& a, const Pose& b) { return a.inverse() * b; }

Vec3 log_rotation(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v;  // first-order
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

Quat exp_rotation(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-12) {
    Quat q(1.0, 0.5 * rotation_vector.x(), 0.5 * rotation_vector.y(),
           0.5 * rotation_vector.z());
    return q.normalized();
  }
  return Quat(Eigen::AngleAxisd(angle, rotation_vector / angle));
}

double rotation_angle(const Quat& q) { return log_rotation(q).norm(); }

double translation_distance(const Pose& a, const Pose& b) {
  return (a.translation() - b.translation()).norm();
}

double rotation_distance(const Pose& a, const Pose& b) {
  return rotation_angle(a.rotation().conjugate() * b.rotation());
}

double wrap_angle(double angle) {
  double r = std::remainder(angle, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

double tilt_angle(const Quat& q) {
  const Vec3 z = q * Vec3::UnitZ();
  return std::atan2(z.cross(Vec3::UnitZ()).norm(), z.z());
}

double yaw_of_grasp(const Pose& relative) {
  const double tilt = tilt_angle(relative.rotation());
  if (tilt > kYawOnlyTolerance) {
    throw Error(ErrorCode::kNotYawOnly,
                "rotation has off-axis component of " + std::to_string(tilt) + " rad");
  }
  const Mat3 r = relative.rotation_matrix();
  return wrap_angle(std::atan2(r(1, 0), r(0, 0)));
}

}  // namespace mlfd::geometry
