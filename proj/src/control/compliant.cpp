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

#include "mlfd/control/compliant.hpp"

#include <algorithm>
#include <cmath>

#include "mlfd/common/error.hpp"

namespace mlfd::control {

namespace {

constexpr double kUnitTol = 1e-6;
// Below this residual norm the force direction is taken as parallel to motion.
constexpr double kMinOrthogonalPart = 0.1;

}  // namespace

void CompliantControllerSpec::validate() const {
  if (std::abs(motion_dir.norm() - 1.0) > kUnitTol) {
    throw Error(ErrorCode::kInvalidArgument, "motion direction must be unit length");
  }
  const double fn = force_dir.norm();
  if (fn > kUnitTol && std::abs(fn - 1.0) > kUnitTol) {
    throw Error(ErrorCode::kInvalidArgument, "force direction must be unit length or zero");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "adaptation rate must be in (0, 1]");
  }
  if (v_des < 0.0 || f_target < 0.0 || k_f < 0.0 || k_y < 0.0 || v_f_max < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "controller gains must be non-negative");
  }
}

Vec3 update_motion_estimate(const Vec3& motion_dir, const Vec3& dx, double alpha,
                            double min_step) {
  const double n = dx.norm();
  if (!(n > min_step) || !std::isfinite(n)) return motion_dir;
  const Vec3 blended = (1.0 - alpha) * motion_dir + alpha * dx / n;
  const double bn = blended.norm();
  // Exact reversal with alpha = 0.5 cancels out; keep the old estimate.
  if (bn < 1e-12) return motion_dir;
  return blended / bn;
}

Vec3 regulated_force_direction(const Vec3& motion_dir, const Vec3& force_dir, double v_des) {
  if (force_dir.norm() < kUnitTol) return Vec3::Zero();
  if (v_des <= 0.0) return force_dir;
  const Vec3 orth = force_dir - force_dir.dot(motion_dir) * motion_dir;
  if (orth.norm() < kMinOrthogonalPart) return Vec3::Zero();
  return orth.normalized();
}

CompliantController::CompliantController(const CompliantControllerSpec& spec)
    : spec_(spec), motion_dir_(spec.motion_dir) {
  spec_.validate();
  force_dir_ = regulated_force_direction(motion_dir_, spec_.force_dir, spec_.v_des);
}

Twist CompliantController::command(const Wrench& measured) {
  const Vec3 f = measured.head<3>();
  Vec3 v = spec_.v_des * motion_dir_;
  Vec3 off_axis = f - f.dot(motion_dir_) * motion_dir_;
  if (force_dir_.squaredNorm() > 0.0) {
    const double f_along = f.dot(force_dir_);
    // The channel only pushes; contact is maintained, never pulled away from.
    v_f_ = std::clamp(v_f_ + spec_.k_f * (spec_.f_target - f_along), 0.0,
                      spec_.v_f_max);
    v += v_f_ * force_dir_;
    off_axis -= off_axis.dot(force_dir_) * force_dir_;
  }
  const double off_norm = off_axis.norm();
  if (off_norm > spec_.yield_deadband) {
    v -= spec_.k_y * (off_norm - spec_.yield_deadband) / off_norm * off_axis;
  }
  Twist out = Twist::Zero();
  out.head<3>() = v;
  return out;
}

void CompliantController::observe(const Vec3& dx) {
  // Motion caused by the force channel is not evidence about the motion direction.
  Vec3 along_motion = dx;
  if (force_dir_.squaredNorm() > 0.0) along_motion -= dx.dot(force_dir_) * force_dir_;
  motion_dir_ = update_motion_estimate(motion_dir_, along_motion, spec_.alpha,
                                       spec_.min_observed_step);
  if (spec_.force_dir.norm() > kUnitTol && spec_.v_des > 0.0) {
    // keep the regulated force orthogonal to the current motion estimate
    const Vec3 refreshed = regulated_force_direction(motion_dir_, spec_.force_dir, spec_.v_des);
    if (refreshed.squaredNorm() > 0.0) force_dir_ = refreshed;
  }
}

}  // namespace mlfd::control
