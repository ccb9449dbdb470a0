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

#include "mlfd/control/sequencer.hpp"

#include "mlfd/common/error.hpp"
#include "mlfd/mechanism/kinematics.hpp"

namespace mlfd::control {

using mechanism::ContactChange;

namespace {

// Keeps only the blocked flags of joint directions that carry the handle
// along the motion estimate (within 60 degrees): a phase ends when its own
// motion is stopped, not when the force channel finds a wall.
mechanism::ContactReport motion_relevant(const mechanism::MechanismModel& model,
                                         const mechanism::JointVector& q,
                                         const mechanism::ContactReport& report,
                                         const Vec3& motion_dir) {
  mechanism::ContactReport out = report;
  const mechanism::Jacobian jac = mechanism::handle_jacobian(model, q);
  for (std::size_t j = 0; j < out.blocked.size(); ++j) {
    const Vec3 col = jac.block<3, 1>(0, static_cast<Eigen::Index>(j));
    const double n = col.norm();
    const double c = n > 1e-12 ? col.dot(motion_dir) / n : 0.0;
    out.blocked[j].upper = out.blocked[j].upper && c > 0.5;
    out.blocked[j].lower = out.blocked[j].lower && c < -0.5;
  }
  return out;
}

}  // namespace

Termination detect_termination(const ServoGoal& goal, const Pose& current, double contact_force,
                               double elapsed, double timeout, double collision_threshold) {
  const ServoOutput out = pbvs_step(goal, current, contact_force, collision_threshold);
  if (out.status == ServoStatus::kReached) return {TerminationStatus::kDone, "reached"};
  if (out.status == ServoStatus::kCollided) return {TerminationStatus::kFailed, "collided"};
  if (elapsed > timeout) return {TerminationStatus::kFailed, "timeout"};
  return {};
}

Termination detect_termination(const PhaseTermination& phase, bool goal_satisfied,
                               ContactChange debounced, double elapsed, double timeout) {
  if (phase.on_goal && goal_satisfied) return {TerminationStatus::kDone, "goal"};
  if (phase.on_gained && debounced == ContactChange::kGained) {
    return {TerminationStatus::kDone, "gained"};
  }
  if (phase.on_lost && debounced == ContactChange::kLost) {
    return {TerminationStatus::kDone, "lost"};
  }
  if (elapsed > timeout) return {TerminationStatus::kFailed, "timeout"};
  return {};
}

SequencerResult run_sequencer(const SequencerSpec& spec, mechanism::Episode& episode,
                              const SequencerOptions& options) {
  if (!episode.state().attached) {
    throw Error(ErrorCode::kNotAttached, "sequencer needs an attached end effector");
  }
  const mechanism::MechanismModel& model = episode.model();
  SequencerResult result;
  const double t0 = episode.time();
  auto record = [&](int phase, const Vec3& cmd, const Vec3& force, const Vec3& m,
                    ContactChange event) {
    if (!options.record_trace && !options.on_frame) return;
    const long k = episode.steps();
    const bool keep = options.record_trace &&
                      (options.trace_stride <= 1 || k % options.trace_stride == 0 ||
                       event != ContactChange::kNone);
    if (!keep && !options.on_frame) return;
    TraceFrame f;
    f.t = episode.time() - t0;
    f.phase = phase;
    f.q = episode.state().q;
    f.ee_position = episode.state().ee_pose.translation();
    f.command = cmd;
    f.force = force;
    f.motion_dir = m;
    f.event = event;
    if (options.on_frame) options.on_frame(f);
    if (keep) result.trace.push_back(std::move(f));
  };

  record(0, Vec3::Zero(), episode.last_report().wrench.head<3>(), Vec3::Zero(),
         ContactChange::kNone);
  if (model.goal_satisfied(episode.state().q)) {
    result.success = true;
    result.reason = "goal";
    return result;
  }
  if (spec.phases.empty()) {
    result.reason = "no phases";
    return result;
  }

  int phase = 0;
  CompliantController controller(spec.phases[0].controller);
  mechanism::ContactChangeDetector detector(spec.debounce);
  while (true) {
    const double elapsed = episode.time() - t0;
    const Wrench measured = episode.measured_wrench();
    const Twist cmd = controller.command(measured);
    const Vec3 before = episode.state().ee_pose.translation();
    episode.step(cmd);
    controller.observe(episode.state().ee_pose.translation() - before);
    const ContactChange event = detector.push(motion_relevant(
        model, episode.state().q, episode.last_report(), controller.motion_dir()));
    record(phase, cmd.head<3>(), measured.head<3>(), controller.motion_dir(), event);

    const bool goal = model.goal_satisfied(episode.state().q);
    if (goal) {
      result.success = true;
      result.reason = "goal";
      break;
    }
    const bool last = phase + 1 == static_cast<int>(spec.phases.size());
    PhaseTermination term = spec.phases[phase].termination;
    if (last) term.on_gained = term.on_lost = false;  // the final phase ends on the goal
    const Termination status = detect_termination(term, goal, event, elapsed, spec.timeout);
    if (status.status == TerminationStatus::kFailed) {
      result.reason = status.reason;
      break;
    }
    if (status.status == TerminationStatus::kDone && !last) {
      result.switches.push_back({phase, phase + 1, episode.time() - t0, event});
      ++phase;
      controller = CompliantController(spec.phases[phase].controller);
      detector.reset();
    }
  }
  result.final_phase = phase;
  result.duration = episode.time() - t0;
  return result;
}

}  // namespace mlfd::control
