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

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mlfd::geometry {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Linear part first, angular part second. Used for both commanded velocities
// and reaction wrenches (force first, torque second).
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Twist = Vec6;
using Wrench = Vec6;

/// Rigid transform. The quaternion is renormalized by every constructor and
/// operation, so its norm stays at 1 up to rounding.
class Pose {
 public:
  Pose() : rotation_(Quat::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Quat& rotation, const Vec3& translation);
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Vec3& t) { return Pose(Quat::Identity(), t); }
  static Pose from_axis_angle(const Vec3& axis, double angle,
                              const Vec3& translation = Vec3::Zero());
  // Rotation about z followed by translation.
  static Pose from_yaw(double yaw, const Vec3& translation = Vec3::Zero());

  const Quat& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Pose operator*(const Pose& other) const;
  Vec3 operator*(const Vec3& point) const { return rotation_ * point + translation_; }
  Vec3 rotate(const Vec3& v) const { return rotation_ * v; }
  Pose inverse() const;

 private:
  Quat rotation_;
  Vec3 translation_;
};

/// a⁻¹ ∘ b: pose of b expressed in the frame of a.
Pose relative_pose(const Pose& a, const Pose& b);

// SO(3) log / exp on rotation vectors (axis * angle).
Vec3 log_rotation(const Quat& q);
Quat exp_rotation(const Vec3& rotation_vector);

/// Angle of the rotation in [0, pi].
double rotation_angle(const Quat& q);

double translation_distance(const Pose& a, const Pose& b);
double rotation_distance(const Pose& a, const Pose& b);

/// Wraps to (-pi, pi].
double wrap_angle(double angle);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

/// Yaw angle of a rotation that is a pure z-rotation within 1e-3 rad.
/// Throws NotYawOnly otherwise.
double yaw_of_grasp(const Pose& relative);

// Angle of the z-axis tilt of a rotation, i.e. its off-z component.
double tilt_angle(const Quat& q);

}  // namespace mlfd::geometry
