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

#include "mlfd/mechanism/model.hpp"

namespace mlfd::mechanism {

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Handle pose in the world frame. Throws OutOfRange for q outside limits.
Pose forward_kinematics(const MechanismModel& model, const JointVector& q);

// Same as forward_kinematics but without the range check.
Pose forward_kinematics_unchecked(const MechanismModel& model, const JointVector& q);

/// Maps joint velocities to the handle twist (linear velocity of the handle
/// origin, angular velocity), both in the world frame.
Jacobian handle_jacobian(const MechanismModel& model, const JointVector& q);

}  // namespace mlfd::mechanism
