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

#include <cmath>
#include <memory>

#include <doctest.h>

#include "mlfd/common/random.hpp"
#include "mlfd/control/compliant.hpp"
#include "mlfd/control/pbvs.hpp"
#include "mlfd/control/sequencer.hpp"
#include "mlfd/mechanism/kinematics.hpp"
#include "mlfd/mechanism/loader.hpp"

using namespace mlfd;
using namespace mlfd::control;
using mechanism::MechanismModel;

namespace {

std::shared_ptr<const MechanismModel> slider(double q_max = 0.2) {
  auto m = std::make_shared<MechanismModel>();
  m->joints.push_back({"x", mechanism::JointKind::kPrismatic, Vec3::UnitX(), Vec3::Zero(), 0.0,
                       q_max});
  m->goal.push_back({0, q_max - 0.01, q_max});
  m->validate();
  return m;
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Pose random_pose(Rng& rng, double spread) {
  const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  return Pose::from_axis_angle(axis, rng.uniform(-spread, spread),
                               Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                    rng.uniform(-0.3, 0.3)));
}

}  // namespace

TEST_CASE("pbvs examples") {
  ServoGoal goal;
  goal.gain = 1.0;
  const ServoOutput at_goal = pbvs_step(goal, goal.grasp_pose);
  CHECK(at_goal.status == ServoStatus::kReached);
  CHECK(at_goal.twist.norm() == 0.0);

  const ServoOutput offset = pbvs_step(goal, Pose::from_translation(Vec3(-0.1, 0, 0)));
  CHECK(offset.status == ServoStatus::kRunning);
  CHECK((offset.twist.head<3>() - Vec3(0.1, 0, 0)).norm() < 1e-12);
  CHECK(offset.twist.tail<3>().norm() < 1e-12);

  const ServoOutput hit = pbvs_step(goal, Pose::from_translation(Vec3(-0.1, 0, 0)), 12.0);
  CHECK(hit.status == ServoStatus::kCollided);
}

TEST_CASE("pbvs error decreases monotonically in free space") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    ServoGoal goal;
    goal.grasp_pose = random_pose(rng, M_PI);
    goal.gain = rng.uniform(0.5, 3.0);
    const double dt = 0.02;
    Pose cur = random_pose(rng, M_PI);
    double prev_t = translation_distance(cur, goal.grasp_pose);
    double prev_r = rotation_distance(cur, goal.grasp_pose);
    bool reached = false;
    for (int k = 0; k < 2000 && !reached; ++k) {
      const ServoOutput out = pbvs_step(goal, cur);
      if (out.status == ServoStatus::kReached) {
        reached = true;
        break;
      }
      cur = integrate_twist(cur, out.twist, dt);
      const double et = translation_distance(cur, goal.grasp_pose);
      const double er = rotation_distance(cur, goal.grasp_pose);
      REQUIRE(et < prev_t + 1e-15);
      REQUIRE(er < prev_r + 1e-12);
      prev_t = et;
      prev_r = er;
    }
    CHECK(reached);
  }
}

TEST_CASE("motion estimate update examples") {
  const Vec3 m = Vec3(1, 1, 0).normalized();
  CHECK((update_motion_estimate(m, 0.01 * m, 0.2) - m).norm() < 1e-12);
  CHECK((update_motion_estimate(Vec3::UnitX(), Vec3(0, 0.01, 0), 1.0) - Vec3::UnitY()).norm() <
        1e-12);
  CHECK((update_motion_estimate(m, Vec3(1e-6, 0, 0), 0.2) - m).norm() == 0.0);
}

TEST_CASE("motion estimate converges to a fixed direction") {
  // Scalar recursion by hand: with alpha = 0.2 the blended vector's angle to d
  // shrinks every step; from 90 degrees it falls below 1 degree within 50 steps.
  Vec3 m = Vec3::UnitX();
  const Vec3 d = Vec3::UnitY();
  double prev = angle_between(m, d);
  for (int k = 0; k < 50; ++k) {
    m = update_motion_estimate(m, 0.001 * d, 0.2);
    const double a = angle_between(m, d);
    CHECK(a < prev);
    CHECK(std::abs(m.norm() - 1.0) < 1e-12);
    prev = a;
  }
  CHECK(prev < geometry::deg_to_rad(1.0));
}

TEST_CASE("motion estimate stays unit and finite on random sequences") {
  Rng rng(22);
  Vec3 m = Vec3::UnitZ();
  for (int k = 0; k < 10000; ++k) {
    const Vec3 dx(rng.normal() * 1e-3, rng.normal() * 1e-3, rng.normal() * 1e-3);
    m = update_motion_estimate(m, dx, rng.uniform(0.01, 1.0));
    REQUIRE(m.allFinite());
    REQUIRE(std::abs(m.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("compliant command examples") {
  CompliantControllerSpec spec;
  spec.motion_dir = Vec3::UnitX();
  spec.force_dir = Vec3::Zero();
  CompliantController free_ctl(spec);
  const Twist cmd = free_ctl.command(Wrench::Zero());
  CHECK((cmd.head<3>() - spec.v_des * Vec3::UnitX()).norm() < 1e-12);

  // A large force orthogonal to both m and f is yielded to.
  spec.force_dir = Vec3::UnitZ();
  CompliantController ctl(spec);
  Wrench w = Wrench::Zero();
  w[1] = 20.0;
  const Twist y = ctl.command(w);
  CHECK(y[1] < 0.0);
  // forces below the deadband are ignored
  w[1] = 0.3;
  CompliantController ctl2(spec);
  CHECK(ctl2.command(w)[1] == 0.0);

  spec.motion_dir = Vec3(2, 0, 0);
  CHECK_THROWS(CompliantController{spec});
}

TEST_CASE("force regulation against a blocking constraint settles near the target") {
  for (const double f_target : {2.0, 5.0, 8.0}) {
    // Sliding along a rail while pressing sideways into its blocked direction.
    mechanism::Episode ep(slider(0.5), Eigen::VectorXd::Zero(1));
    CompliantControllerSpec spec;
    spec.motion_dir = Vec3::UnitX();
    spec.force_dir = Vec3::UnitZ();
    spec.f_target = f_target;
    CompliantController ctl(spec);
    double f = 0.0;
    for (int k = 0; k < 300; ++k) {
      const Vec3 before = ep.state().ee_pose.translation();
      ep.step(ctl.command(ep.measured_wrench()));
      ctl.observe(ep.state().ee_pose.translation() - before);
      f = ep.last_report().wrench.head<3>().dot(Vec3::UnitZ());
    }
    CHECK(std::abs(f - f_target) <= 0.1 * f_target);
  }
  // Pure pressing (no cruise) into a joint limit, with sensor noise.
  mechanism::Episode ep(slider(0.01), Eigen::VectorXd::Zero(1));
  ep.set_sensor_noise(0.2, 5);
  CompliantControllerSpec spec;
  spec.v_des = 0.0;
  spec.motion_dir = Vec3::UnitY();
  spec.force_dir = Vec3::UnitX();
  CompliantController ctl(spec);
  double sum = 0.0;
  int n = 0;
  for (int k = 0; k < 500; ++k) {
    ep.step(ctl.command(ep.measured_wrench()));
    if (k >= 300) {
      sum += ep.last_report().wrench[0];
      ++n;
    }
  }
  CHECK(std::abs(sum / n - spec.f_target) <= 0.1 * spec.f_target);
}

TEST_CASE("termination predicates") {
  ServoGoal goal;
  CHECK(detect_termination(goal, goal.grasp_pose, 0.0, 0.0, 10.0).status ==
        TerminationStatus::kDone);
  const Pose away = Pose::from_translation(Vec3(0.1, 0, 0));
  const Termination hit = detect_termination(goal, away, 15.0, 1.0, 10.0);
  CHECK(hit.status == TerminationStatus::kFailed);
  CHECK(hit.reason == "collided");
  const Termination late = detect_termination(goal, away, 0.0, 11.0, 10.0);
  CHECK(late.status == TerminationStatus::kFailed);
  CHECK(late.reason == "timeout");

  PhaseTermination phase;
  CHECK(detect_termination(phase, false, mechanism::ContactChange::kGained, 0.0, 60.0).status ==
        TerminationStatus::kDone);
  CHECK(detect_termination(phase, false, mechanism::ContactChange::kLost, 0.0, 60.0).status ==
        TerminationStatus::kRunning);
  CHECK(detect_termination(phase, false, mechanism::ContactChange::kNone, 61.0, 60.0).reason ==
        "timeout");
}

TEST_CASE("empty sequence succeeds only if the goal already holds") {
  auto m = slider(0.2);
  mechanism::Episode open(m, Eigen::VectorXd::Constant(1, 0.2));
  CHECK(run_sequencer(SequencerSpec{}, open).success);
  mechanism::Episode closed(m, Eigen::VectorXd::Zero(1));
  CHECK_FALSE(run_sequencer(SequencerSpec{}, closed).success);
}

TEST_CASE("drawer opens with exactly one contact-change transition") {
  for (const char* name : {"drawer_a", "drawer_b"}) {
    auto m = std::make_shared<const MechanismModel>(mechanism::bundled_mechanism(name));
    mechanism::Episode ep(m, m->zero_configuration());
    SequencerSpec seq;
    PhaseSpec rotate;
    rotate.controller.motion_dir = Vec3::UnitZ();
    rotate.controller.force_dir = Vec3::UnitX();
    PhaseSpec pull;
    pull.controller.motion_dir = Vec3::UnitX();
    pull.controller.force_dir = Vec3::UnitZ();
    pull.termination.on_goal = true;
    seq.phases = {rotate, pull};
    const SequencerResult r = run_sequencer(seq, ep);
    CHECK(r.success);
    CHECK(r.switches.size() == 1);
    CHECK(ep.state().q[1] == doctest::Approx(m->joints[1].q_max).epsilon(1e-6));
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      REQUIRE(r.trace[i].phase >= r.trace[i - 1].phase);
    }
  }
}

TEST_CASE("lock without a gate-phase force times out") {
  auto m = std::make_shared<const MechanismModel>(mechanism::bundled_mechanism("lock1"));
  SequencerSpec seq;
  seq.timeout = 20.0;
  auto phase = [](Vec3 m_dir, Vec3 f_dir) {
    PhaseSpec p;
    p.controller.motion_dir = m_dir;
    p.controller.force_dir = f_dir;
    return p;
  };
  const Vec3 tangent = Vec3::UnitY();
  seq.phases = {phase(Vec3::UnitZ(), -Vec3::UnitZ()), phase(Vec3::UnitX(), Vec3::UnitZ()),
                phase(Vec3::UnitZ(), Vec3::UnitX()), phase(tangent, Vec3::UnitZ())};
  {
    mechanism::Episode ep(m, m->zero_configuration());
    const SequencerResult r = run_sequencer(seq, ep);
    CHECK(r.success);
    CHECK(r.switches.size() == 3);
  }
  seq.phases[1].controller.force_dir = Vec3::Zero();
  {
    mechanism::Episode ep(m, m->zero_configuration());
    const SequencerResult r = run_sequencer(seq, ep);
    CHECK_FALSE(r.success);
    CHECK(r.reason == "timeout");
    double max_lift = 0.0;
    for (const TraceFrame& f : r.trace) max_lift = std::max(max_lift, f.q[0]);
    CHECK(max_lift <= m->gates[0].block_lo + 1e-9);
  }
}
