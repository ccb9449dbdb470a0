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

namespace mlfd::control {

using geometry::Pose;
using geometry::Twist;
using geometry::Vec3;

struct ServoGoal {
  Pose grasp_pose;
  double gain = 1.5;                  // 1/s
  double position_tolerance = 0.003;  // m
  double angle_tolerance = 0.05;      // rad
};

enum class ServoStatus { kRunning, kReached, kCollided };

const char* to_string(ServoStatus status);

struct ServoOutput {
  Twist twist = Twist::Zero();  // world frame: linear velocity, angular velocity
  ServoStatus status = ServoStatus::kRunning;
};

/// Proportional log-map law: v = gain * (goal.t - cur.t), w = gain * log(goal.R cur.R^T).
/// contact_force is the magnitude of the reaction reported by the environment.
ServoOutput pbvs_step(const ServoGoal& goal, const Pose& current, double contact_force = 0.0,
                      double collision_threshold = 10.0);

/// Applies a world-frame twist for dt (translation and left-multiplied rotation).
Pose integrate_twist(const Pose& pose, const Twist& twist, double dt);

}  // namespace mlfd::control
