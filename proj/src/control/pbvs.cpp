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

#include "mlfd/control/pbvs.hpp"

namespace mlfd::control {

const char* to_string(ServoStatus status) {
  switch (status) {
    case ServoStatus::kReached: return "reached";
    case ServoStatus::kCollided: return "collided";
    case ServoStatus::kRunning: break;
  }
  return "running";
}

ServoOutput pbvs_step(const ServoGoal& goal, const Pose& current, double contact_force,
                      double collision_threshold) {
  ServoOutput out;
  const Vec3 dt = goal.grasp_pose.translation() - current.translation();
  const Vec3 dr =
      geometry::log_rotation(goal.grasp_pose.rotation() * current.rotation().conjugate());
  if (dt.norm() <= goal.position_tolerance && dr.norm() <= goal.angle_tolerance) {
    out.status = ServoStatus::kReached;
    return out;
  }
  if (contact_force > collision_threshold) {
    out.status = ServoStatus::kCollided;
    return out;
  }
  out.twist.head<3>() = goal.gain * dt;
  out.twist.tail<3>() = goal.gain * dr;
  return out;
}

Pose integrate_twist(const Pose& pose, const Twist& twist, double dt) {
  const Vec3 w = twist.tail<3>() * dt;
  return Pose(geometry::exp_rotation(w) * pose.rotation(), pose.translation() + twist.head<3>() * dt);
}

}  // namespace mlfd::control
