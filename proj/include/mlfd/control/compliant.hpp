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

using geometry::Twist;
using geometry::Vec3;
using geometry::Wrench;

struct CompliantControllerSpec {
  Vec3 motion_dir = Vec3::UnitX();   // unit
  Vec3 force_dir = Vec3::Zero();     // unit or zero
  double v_des = 0.03;               // m/s
  double f_target = 5.0;             // N
  double k_f = 0.002;                // (m/s)/N
  double alpha = 0.2;                // motion estimate adaptation rate
  double k_y = 0.001;                // yielding gain, (m/s)/N
  double yield_deadband = 0.5;       // N
  double v_f_max = 0.02;             // m/s, bound on the force channel velocity
  double min_observed_step = 5e-5;   // m, displacements below this carry no direction

  /// Throws InvalidArgument for non-unit directions or out-of-range gains.
  void validate() const;
};

/// m <- normalize((1 - alpha) m + alpha dx/|dx|) when |dx| > min_step, else m.
Vec3 update_motion_estimate(const Vec3& motion_dir, const Vec3& dx, double alpha,
                            double min_step = 5e-5);

/// Force direction actually regulated: the part of f orthogonal to m when the
/// controller is moving, zero when that part is negligible.
Vec3 regulated_force_direction(const Vec3& motion_dir, const Vec3& force_dir, double v_des);

/// Adaptive compliant controller: cruise along the motion estimate, regulate
/// the contact force along f through an integrating admittance channel, and
/// yield to unexpected forces orthogonal to both.
class CompliantController {
 public:
  explicit CompliantController(const CompliantControllerSpec& spec);

  const CompliantControllerSpec& spec() const { return spec_; }
  const Vec3& motion_dir() const { return motion_dir_; }
  const Vec3& force_dir() const { return force_dir_; }
  double force_velocity() const { return v_f_; }

  /// Translation command from the measured reaction wrench.
  Twist command(const Wrench& measured);
  /// Feeds the end-effector displacement realized since the last command.
  void observe(const Vec3& dx);

 private:
  CompliantControllerSpec spec_;
  Vec3 motion_dir_;
  Vec3 force_dir_;
  double v_f_ = 0.0;
};

}  // namespace mlfd::control
