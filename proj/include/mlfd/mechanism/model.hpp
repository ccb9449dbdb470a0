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

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mlfd/geometry/pose.hpp"

namespace mlfd::mechanism {

using geometry::Pose;
using geometry::Quat;
using geometry::Vec3;
using JointVector = Eigen::VectorXd;

enum class JointKind { kPrismatic, kRevolute };

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::kPrismatic;
  Vec3 axis = Vec3::UnitX();   // unit, in the parent link frame at q = 0
  Vec3 pivot = Vec3::Zero();   // revolute only
  double q_min = 0.0;
  double q_max = 0.0;
};

/// Narrow passage: the gated joint may not be strictly inside
/// (block_lo, block_hi) unless the enabling joint lies in
/// [enable_lo, enable_hi].
struct GateSpec {
  int gated_joint = 0;
  double block_lo = 0.0;
  double block_hi = 0.0;
  int enabling_joint = 1;
  double enable_lo = 0.0;
  double enable_hi = 0.0;
};

struct GoalInterval {
  int joint = 0;
  double lo = 0.0;
  double hi = 0.0;
};

// Visual description used by the renderer; kinematics ignore it.
struct Appearance {
  double object_width = 0.04;
  double knob_thickness = 0.01;
  std::array<int, 3> target_rgb{50, 190, 50};
  std::array<int, 3> marking_rgb{40, 40, 40};
  std::array<int, 3> degraded_target_rgb{110, 165, 110};
  std::array<int, 3> body_rgb{100, 100, 110};
  Vec3 body_half_extents{0.045, 0.04, 0.04};
  double body_gap = 0.02;  // knob top above the body top
};

struct MechanismModel {
  std::string name;
  Pose base_pose;
  std::vector<JointSpec> joints;
  std::vector<GateSpec> gates;
  Pose handle_offset;
  std::vector<GoalInterval> goal;

  double reaction_stiffness = 500.0;  // N per (m/s) of blocked command
  double rotation_weight = 0.0;       // 0: wrist compliant in rotation
  double gate_entry_speed = 1e-3;     // m/s needed to enter a narrow passage
  std::string sketch_plane = "xz";
  Appearance appearance;

  // Joint-space waypoints of the scripted demonstration, if any.
  std::vector<JointVector> demo_waypoints;
  double demo_speed = 0.03;  // handle speed, m/s

  std::size_t dof() const { return joints.size(); }
  /// Throws InvariantViolation on any broken invariant.
  void validate() const;
  bool goal_satisfied(const JointVector& q) const;
  JointVector lower_limits() const;
  JointVector upper_limits() const;
  JointVector zero_configuration() const;
};

std::string to_string(JointKind kind);

}  // namespace mlfd::mechanism
