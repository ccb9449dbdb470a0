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

#include "mlfd/demo/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlfd/common/error.hpp"

namespace mlfd::demo {

using mechanism::Episode;

const char* to_string(HypothesisSource source) {
  switch (source) {
    case HypothesisSource::kNextMotion: return "next_motion";
    case HypothesisSource::kPreviousMotion: return "previous_motion";
    case HypothesisSource::kGravity: return "gravity";
    case HypothesisSource::kNone: break;
  }
  return "none";
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kValid: return "valid";
    case Verdict::kMoved: return "moved";
    case Verdict::kSkipped: break;
  }
  return "skipped";
}

std::vector<ForceCandidate> hypothesize_forces(int i, const std::vector<Segment>& segments) {
  const int k = static_cast<int>(segments.size());
  if (i < 1 || i > k) throw Error(ErrorCode::kOutOfRange, "segment index out of range");
  std::vector<ForceCandidate> out;
  if (i < k) out.push_back({segments[static_cast<std::size_t>(i)].direction, HypothesisSource::kNextMotion});
  if (i > 1) {
    out.push_back({segments[static_cast<std::size_t>(i - 2)].direction, HypothesisSource::kPreviousMotion});
  }
  out.push_back({kGravityDirection, HypothesisSource::kGravity});
  return out;
}

namespace {

// Drives the end effector back to a world position with a saturated
// proportional law.
double servo_to(Episode& episode, const Vec3& target, const AugmentParams& params) {
  const int steps = static_cast<int>(std::ceil(params.restore_timeout / episode.dt()));
  for (int k = 0; k < steps; ++k) {
    const Vec3 err = target - episode.state().ee_pose.translation();
    if (err.norm() < 1e-4) break;
    Vec3 v = params.restore_gain * err;
    if (v.norm() > params.restore_speed) v *= params.restore_speed / v.norm();
    geometry::Twist cmd = geometry::Twist::Zero();
    cmd.head<3>() = v;
    episode.step(cmd);
  }
  return (target - episode.state().ee_pose.translation()).norm();
}

}  // namespace

ForceHypothesisResult evaluate_force_hypothesis(Episode& episode, const ForceCandidate& candidate,
                                                const AugmentParams& params) {
  if (!episode.state().attached) {
    throw Error(ErrorCode::kNotAttached, "hypothesis evaluation needs an attached end effector");
  }
  ForceHypothesisResult result;
  result.candidate = candidate;
  const Vec3 f_hat = candidate.direction.normalized();
  const Vec3 start = episode.state().ee_pose.translation();
  // Clear any reaction left over from earlier motion.
  episode.step(geometry::Twist::Zero());

  // Pure force regulation: the velocity integrates the error between the
  // target force vector and the measured force, so a free component of the
  // push keeps moving while blocked components settle at the target. Lateral
  // errors inside the deadband are tolerated, as friction would.
  const control::CompliantControllerSpec& gains = params.controller;
  Vec3 v = Vec3::Zero();
  const int steps = static_cast<int>(std::round(params.eval_duration / episode.dt()));
  for (int k = 0; k < steps; ++k) {
    const Vec3 err = params.push_force * f_hat - episode.measured_wrench().head<3>();
    const Vec3 along = err.dot(f_hat) * f_hat;
    Vec3 lateral = err - along;
    const double ln = lateral.norm();
    lateral = ln > params.lateral_deadband ? Vec3(lateral * (1.0 - params.lateral_deadband / ln))
                                           : Vec3::Zero();
    v += gains.k_f * (along + lateral);
    if (v.norm() > gains.v_f_max) v *= gains.v_f_max / v.norm();
    geometry::Twist cmd = geometry::Twist::Zero();
    cmd.head<3>() = v;
    episode.step(cmd);
    result.displacement =
        std::max(result.displacement, (episode.state().ee_pose.translation() - start).norm());
  }
  result.verdict = result.displacement <= params.move_tolerance ? Verdict::kValid : Verdict::kMoved;

  const double residual = servo_to(episode, start, params);
  if (residual > 2.0 * params.move_tolerance) {
    throw Error(ErrorCode::kRestoreFailure,
                "could not return to the evaluation start (residual " + std::to_string(residual) + " m)");
  }
  // Settle with zero command so the next push starts from a fresh contact state.
  episode.step(geometry::Twist::Zero());
  return result;
}

AugmentedPlan augment_contact(Episode& episode, const std::vector<Segment>& segments,
                              const AugmentParams& params) {
  if (segments.empty()) throw Error(ErrorCode::kInvalidArgument, "no segments to augment");
  AugmentedPlan plan;
  plan.reference_grasp = episode.state().ee_pose;
  const int k = static_cast<int>(segments.size());
  for (int i = 1; i <= k; ++i) {
    const Segment& seg = segments[static_cast<std::size_t>(i - 1)];
    PlanStep step;
    step.motion_dir = seg.direction;
    step.start = seg.start;
    step.q_eval = episode.state().q;
    for (const ForceCandidate& c : hypothesize_forces(i, segments)) {
      if (params.on_candidate) params.on_candidate(i, c);
      ForceHypothesisResult r = evaluate_force_hypothesis(episode, c, params);
      r.segment = i;
      if (params.on_result) params.on_result(r);
      step.evaluations.push_back(r);
      if (r.verdict == Verdict::kValid) {
        step.force_dir = c.direction;
        step.source = c.source;
        break;
      }
    }
    if (step.source == HypothesisSource::kNone) {
      plan.warnings.push_back("segment " + std::to_string(i) +
                              ": no force hypothesis kept the mechanism still");
    }
    plan.steps.push_back(step);
    if (i == k) break;

    // Transit to the next start with the instantiated controller.
    const Vec3 target = segments[static_cast<std::size_t>(i)].start;
    control::CompliantControllerSpec spec = params.controller;
    spec.motion_dir = step.motion_dir;
    spec.force_dir = step.force_dir;
    control::CompliantController ctl(spec);
    double best = std::numeric_limits<double>::infinity();
    bool arrived = false;
    const double t0 = episode.time();
    while (true) {
      const Vec3 before = episode.state().ee_pose.translation();
      episode.step(ctl.command(episode.measured_wrench()));
      ctl.observe(episode.state().ee_pose.translation() - before);
      const double d = (episode.state().ee_pose.translation() - target).norm();
      if (d <= params.arrive_tolerance) arrived = true;
      if (arrived && d >= best - 1e-6) break;  // closest approach or stall
      best = std::min(best, d);
      if (episode.time() - t0 > params.phase_timeout) {
        if (arrived) break;
        throw Error(ErrorCode::kTransitFailure,
                    "segment " + std::to_string(i + 1) + " start not reached (closest " +
                        std::to_string(best) + " m)");
      }
    }
  }
  return plan;
}

AugmentedPlan motion_only_plan(const std::vector<Segment>& segments, const Pose& reference_grasp) {
  AugmentedPlan plan;
  plan.reference_grasp = reference_grasp;
  for (const Segment& s : segments) {
    PlanStep step;
    step.motion_dir = s.direction;
    step.start = s.start;
    plan.steps.push_back(step);
  }
  return plan;
}

control::SequencerSpec plan_to_sequencer(const AugmentedPlan& plan, const Pose& grasp_pose,
                                         const control::CompliantControllerSpec& gains,
                                         double timeout) {
  const geometry::Mat3 map =
      grasp_pose.rotation_matrix() * plan.reference_grasp.rotation_matrix().transpose();
  control::SequencerSpec seq;
  seq.timeout = timeout;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& s = plan.steps[i];
    control::PhaseSpec phase;
    phase.controller = gains;
    phase.controller.motion_dir = (map * s.motion_dir).normalized();
    if (s.force_dir.norm() > 0.0) {
      phase.controller.force_dir =
          s.source == HypothesisSource::kGravity ? s.force_dir : Vec3((map * s.force_dir).normalized());
    } else {
      phase.controller.force_dir = Vec3::Zero();
    }
    const bool last = i + 1 == plan.steps.size();
    phase.termination.on_gained = !last;
    phase.termination.on_goal = last;
    seq.phases.push_back(phase);
  }
  return seq;
}

}  // namespace mlfd::demo
