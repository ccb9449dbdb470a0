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

#include "mlfd/mechanism/kinematics.hpp"

#include <string>

#include "mlfd/common/error.hpp"

namespace mlfd::mechanism {

namespace {

Pose joint_transform(const JointSpec& joint, double q) {
  if (joint.kind == JointKind::kPrismatic) return Pose::from_translation(joint.axis * q);
  // Rotation about an axis through the pivot: T(p) R T(-p).
  const Pose rot = Pose::from_axis_angle(joint.axis, q);
  return Pose::from_translation(joint.pivot) * rot * Pose::from_translation(-joint.pivot);
}

}  // namespace

Pose forward_kinematics_unchecked(const MechanismModel& model, const JointVector& q) {
  Pose t = model.base_pose;
  for (std::size_t i = 0; i < model.joints.size(); ++i) {
    t = t * joint_transform(model.joints[i], q[static_cast<Eigen::Index>(i)]);
  }
  return t * model.handle_offset;
}

Pose forward_kinematics(const MechanismModel& model, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != model.dof()) {
    throw Error(ErrorCode::kOutOfRange, "joint vector has wrong dimension");
  }
  constexpr double kTol = 1e-9;
  for (std::size_t i = 0; i < model.joints.size(); ++i) {
    const JointSpec& j = model.joints[i];
    const double qi = q[static_cast<Eigen::Index>(i)];
    if (qi < j.q_min - kTol || qi > j.q_max + kTol) {
      throw Error(ErrorCode::kOutOfRange,
                  "joint '" + j.name + "' at " + std::to_string(qi) + " outside range");
    }
  }
  return forward_kinematics_unchecked(model, q);
}

Jacobian handle_jacobian(const MechanismModel& model, const JointVector& q) {
  const std::size_t n = model.dof();
  Jacobian jac = Jacobian::Zero(6, static_cast<Eigen::Index>(n));
  const Vec3 handle = forward_kinematics_unchecked(model, q).translation();
  Pose parent = model.base_pose;
  for (std::size_t i = 0; i < n; ++i) {
    const JointSpec& j = model.joints[i];
    const Vec3 axis = parent.rotate(j.axis);
    const auto col = static_cast<Eigen::Index>(i);
    if (j.kind == JointKind::kPrismatic) {
      jac.block<3, 1>(0, col) = axis;
    } else {
      const Vec3 pivot = parent * j.pivot;
      jac.block<3, 1>(0, col) = axis.cross(handle - pivot);
      jac.block<3, 1>(3, col) = axis;
    }
    parent = parent * joint_transform(j, q[col]);
  }
  return jac;
}

}  // namespace mlfd::mechanism
