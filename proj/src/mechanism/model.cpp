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

#include "mlfd/mechanism/model.hpp"

#include <algorithm>
#include <cmath>

#include "mlfd/common/error.hpp"

namespace mlfd::mechanism {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvariantViolation, what);
}

}  // namespace

std::string to_string(JointKind kind) {
  return kind == JointKind::kPrismatic ? "prismatic" : "revolute";
}

void MechanismModel::validate() const {
  const int n = static_cast<int>(joints.size());
  require(n > 0, "mechanism has no joints");
  for (const JointSpec& j : joints) {
    require(std::abs(j.axis.norm() - 1.0) <= 1e-9,
            "axis of joint '" + j.name + "' is not unit length");
    require(j.q_min < j.q_max, "joint '" + j.name + "' has an empty range");
  }
  for (const GateSpec& g : gates) {
    require(g.gated_joint >= 0 && g.gated_joint < n, "gate joint index out of range");
    require(g.enabling_joint >= 0 && g.enabling_joint < n, "gate enabler index out of range");
    require(g.gated_joint != g.enabling_joint, "gate joint enables itself");
    require(g.block_lo < g.block_hi, "gate blocking interval is empty");
    require(g.enable_lo < g.enable_hi, "gate enabling interval is empty");
  }
  for (const GoalInterval& goal_interval : goal) {
    require(goal_interval.joint >= 0 && goal_interval.joint < n, "goal joint out of range");
    require(goal_interval.lo <= goal_interval.hi, "goal interval is empty");
  }
  require(reaction_stiffness > 0.0, "reaction stiffness must be positive");
  require(rotation_weight >= 0.0, "rotation weight must be non-negative");
  require(gate_entry_speed >= 0.0, "gate entry speed must be non-negative");
}

bool MechanismModel::goal_satisfied(const JointVector& q) const {
  for (const GoalInterval& g : goal) {
    if (q[g.joint] < g.lo || q[g.joint] > g.hi) return false;
  }
  return true;
}

JointVector MechanismModel::lower_limits() const {
  JointVector v(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) v[i] = joints[i].q_min;
  return v;
}

JointVector MechanismModel::upper_limits() const {
  JointVector v(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) v[i] = joints[i].q_max;
  return v;
}

JointVector MechanismModel::zero_configuration() const {
  JointVector q(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) {
    q[i] = std::clamp(0.0, joints[i].q_min, joints[i].q_max);
  }
  return q;
}

}  // namespace mlfd::mechanism
