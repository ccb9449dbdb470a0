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
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "mlfd/common/error.hpp"
#include "mlfd/common/random.hpp"
#include "mlfd/mechanism/box_lsq.hpp"
#include "mlfd/mechanism/kinematics.hpp"
#include "mlfd/mechanism/loader.hpp"
#include "mlfd/mechanism/simulator.hpp"

using namespace mlfd;
using namespace mlfd::mechanism;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

MechanismModel single_prismatic() {
  MechanismModel m;
  m.name = "slider";
  m.joints.push_back({"x", JointKind::kPrismatic, Vec3::UnitX(), Vec3::Zero(), 0.0, 0.2});
  m.validate();
  return m;
}

MechanismModel single_revolute() {
  MechanismModel m;
  m.joints.push_back({"r", JointKind::kRevolute, Vec3::UnitZ(), Vec3::Zero(), -M_PI, M_PI});
  m.handle_offset = Pose::from_translation(Vec3(0.1, 0, 0));
  m.validate();
  return m;
}

// Two prismatic joints (x then z) with a gate: z cannot enter (0.01, 0.05)
// unless x is within [0.02, 0.03].
MechanismModel gated_pair() {
  MechanismModel m;
  m.joints.push_back({"x", JointKind::kPrismatic, Vec3::UnitX(), Vec3::Zero(), 0.0, 0.05});
  m.joints.push_back({"z", JointKind::kPrismatic, Vec3::UnitZ(), Vec3::Zero(), 0.0, 0.05});
  m.gates.push_back({1, 0.01, 0.05, 0, 0.02, 0.03});
  m.validate();
  return m;
}

Twist linear(double x, double y, double z) {
  Twist t = Twist::Zero();
  t.head<3>() = Vec3(x, y, z);
  return t;
}

// Independent box least-squares oracle: projected gradient descent.
double projected_gradient_cost(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const double lip = (a.transpose() * a).eigenvalues().real().maxCoeff() + 1e-12;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(a.cols()).cwiseMax(lo).cwiseMin(hi);
  for (int it = 0; it < 20000; ++it) {
    x = (x - a.transpose() * (a * x - b) / lip).cwiseMax(lo).cwiseMin(hi);
  }
  return (a * x - b).squaredNorm();
}

// Gate predicate by direct enumeration: is configuration q legal?
bool legal(const MechanismModel& m, const JointVector& q) {
  for (const GateSpec& g : m.gates) {
    const double x = q[g.gated_joint];
    const double e = q[g.enabling_joint];
    const bool inside = x > g.block_lo + 1e-9 && x < g.block_hi - 1e-9;
    if (inside && (e < g.enable_lo - 1e-9 || e > g.enable_hi + 1e-9)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("forward kinematics examples") {
  const MechanismModel slider = single_prismatic();
  const Pose p0 = forward_kinematics(slider, JointVector::Zero(1));
  CHECK((p0.translation() - (slider.base_pose * slider.handle_offset).translation()).norm() < 1e-12);
  JointVector q(1);
  q << 0.1;
  CHECK((forward_kinematics(slider, q).translation() - Vec3(0.1, 0, 0)).norm() < 1e-12);

  const MechanismModel rev = single_revolute();
  q << M_PI / 2;
  CHECK((forward_kinematics(rev, q).translation() - Vec3(0, 0.1, 0)).norm() < 1e-12);

  q << 0.5;
  CHECK(code_of([&] { forward_kinematics(slider, q); }) == ErrorCode::kOutOfRange);
}

TEST_CASE("jacobian matches finite differences") {
  const MechanismModel lock = bundled_mechanism("lock1");
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    JointVector q(3);
    for (int j = 0; j < 3; ++j) {
      q[j] = rng.uniform(lock.joints[j].q_min + 1e-3, lock.joints[j].q_max - 1e-3);
    }
    const Jacobian jac = handle_jacobian(lock, q);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6;
      JointVector qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      const Vec3 fd = (forward_kinematics_unchecked(lock, qp).translation() -
                       forward_kinematics_unchecked(lock, qm).translation()) / (2 * h);
      CHECK((fd - jac.block<3, 1>(0, j)).norm() < 1e-6);
    }
  }
}

TEST_CASE("box least squares agrees with projected gradient") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 4);
    Eigen::MatrixXd a(6, n);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    }
    Eigen::VectorXd b(6), lo(n), hi(n);
    for (int i = 0; i < 6; ++i) b[i] = rng.normal();
    for (int j = 0; j < n; ++j) {
      lo[j] = rng.uniform(-1.0, 0.0);
      hi[j] = lo[j] + rng.uniform(0.0, 1.0);
    }
    const BoxLsqResult sol = solve_box_lsq(a, b, lo, hi);
    REQUIRE(sol.feasible);
    CHECK((sol.x.array() >= lo.array()).all());
    CHECK((sol.x.array() <= hi.array()).all());
    CHECK(sol.cost <= projected_gradient_cost(a, b, lo, hi) + 1e-8);
  }
}

TEST_CASE("step along the free axis realizes the command") {
  const MechanismModel slider = single_prismatic();
  JointVector q(1);
  q << 0.1;
  const StepResult r = step_constrained(slider, make_state(slider, q), linear(0.05, 0, 0), 0.01);
  CHECK(r.state.q[0] == doctest::Approx(0.1005));
  CHECK(r.report.wrench.norm() < 1e-9);
}

TEST_CASE("step orthogonal to all axes is fully blocked") {
  const MechanismModel slider = single_prismatic();
  JointVector q(1);
  q << 0.1;
  const StepResult r = step_constrained(slider, make_state(slider, q), linear(0, 0.02, -0.01), 0.01);
  CHECK(r.state.q[0] == doctest::Approx(0.1));
  CHECK((r.report.wrench.head<3>() - slider.reaction_stiffness * Vec3(0, 0.02, -0.01)).norm() < 1e-9);
}

TEST_CASE("step requires attachment and positive dt") {
  const MechanismModel slider = single_prismatic();
  MechanismState s = make_state(slider, JointVector::Zero(1), false);
  CHECK(code_of([&] { step_constrained(slider, s, linear(1, 0, 0), 0.01); }) ==
        ErrorCode::kNotAttached);
  s.attached = true;
  CHECK(code_of([&] { step_constrained(slider, s, linear(1, 0, 0), 0.0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("gate blocks unless the enabling joint is in place") {
  const MechanismModel m = gated_pair();
  JointVector q(2);
  q << 0.0, 0.01;  // at the gate, enabler outside
  StepResult r = step_constrained(m, make_state(m, q), linear(0, 0, 0.02), 0.01);
  CHECK(r.state.q[1] == doctest::Approx(0.01));
  CHECK(r.report.blocked[1].upper);

  q << 0.025, 0.01;  // enabler inside
  r = step_constrained(m, make_state(m, q), linear(0, 0, 0.02), 0.01);
  CHECK(r.state.q[1] == doctest::Approx(0.0102));
  // once inside the passage the enabler is held within its interval
  for (int k = 0; k < 100; ++k) r = step_constrained(m, r.state, linear(0.02, 0, 0), 0.01);
  CHECK(r.state.q[0] == doctest::Approx(0.03));
  CHECK(r.report.blocked[0].upper);
}

TEST_CASE("random command sequences respect limits and gates") {
  const MechanismModel m = gated_pair();
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    MechanismState s = make_state(m, JointVector::Zero(2));
    for (int k = 0; k < 300; ++k) {
      const Twist cmd = linear(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                               rng.uniform(-0.05, 0.05));
      s = step_constrained(m, s, cmd, 0.01).state;
      REQUIRE(legal(m, s.q));
      REQUIRE((s.q.array() >= m.lower_limits().array() - 1e-12).all());
      REQUIRE((s.q.array() <= m.upper_limits().array() + 1e-12).all());
      REQUIRE((s.ee_pose.translation() - forward_kinematics(m, s.q).translation()).norm() < 1e-9);
    }
  }
}

TEST_CASE("lock fixtures respect limits under random commands") {
  for (const std::string name : {"lock1", "lock2", "lock3", "drawer_a"}) {
    const MechanismModel m = bundled_mechanism(name);
    Rng rng(14);
    MechanismState s = make_state(m, m.zero_configuration());
    for (int k = 0; k < 500; ++k) {
      const Twist cmd = linear(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                               rng.uniform(-0.05, 0.05));
      s = step_constrained(m, s, cmd, 0.01).state;
      REQUIRE(legal(m, s.q));
      CHECK_NOTHROW(forward_kinematics(m, s.q));
    }
  }
}

TEST_CASE("realized twist is idempotent under re-projection") {
  const MechanismModel m = bundled_mechanism("lock1");
  Rng rng(15);
  MechanismState s = make_state(m, m.zero_configuration());
  for (int k = 0; k < 200; ++k) {
    const Twist cmd = linear(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                             rng.uniform(-0.05, 0.05));
    const StepResult r = step_constrained(m, s, cmd, 0.01);
    const StepResult again = step_constrained(m, s, r.realized, 0.01);
    CHECK((again.realized - r.realized).head<3>().norm() < 1e-9);
    s = r.state;
  }
}

TEST_CASE("reaction is zero exactly for commands in the feasible cone") {
  // Gate-free two-joint model at a corner of its range.
  MechanismModel m;
  m.joints.push_back({"x", JointKind::kPrismatic, Vec3::UnitX(), Vec3::Zero(), 0.0, 0.1});
  m.joints.push_back({"r", JointKind::kRevolute, Vec3::UnitX(), Vec3(0, 0, 0.05), 0.0, 1.0});
  m.validate();
  JointVector q(2);
  q << 0.0, 0.0;  // both at lower limits
  const MechanismState s = make_state(m, q);
  const Jacobian jac = handle_jacobian(m, q);
  Rng rng(16);
  int feasible_count = 0;
  for (int k = 0; k < 400; ++k) {
    Twist cmd = Twist::Zero();
    if (k % 2 == 0) {
      // built from the cone: nonnegative joint rates
      Eigen::Vector2d qd(std::abs(rng.normal()) * 0.02, std::abs(rng.normal()) * 0.02);
      if (k % 4 == 0) qd[rng.bernoulli(0.5) ? 0 : 1] = 0.0;
      cmd.head<3>() = jac.topRows<3>() * qd;
    } else {
      cmd = linear(rng.normal(), rng.normal(), rng.normal() * 0.1);
    }
    cmd.head<3>() *= 0.01 / cmd.head<3>().norm();
    // Oracle: brute-force grid over admissible joint rates, then a finer grid
    // around the coarse optimum.
    double best = 1e9;
    Eigen::Vector2d best_qd = Eigen::Vector2d::Zero();
    auto scan = [&](Eigen::Vector2d origin, Eigen::Vector2d step) {
      for (int i = -200; i <= 200; ++i) {
        for (int j = -200; j <= 200; ++j) {
          const Eigen::Vector2d qd =
              (origin + Eigen::Vector2d(i * step[0], j * step[1])).cwiseMax(0.0);
          const double res = (jac.topRows<3>() * qd - cmd.head<3>()).norm();
          if (res < best) {
            best = res;
            best_qd = qd;
          }
        }
      }
    };
    scan(Eigen::Vector2d(0.01, 0.2), Eigen::Vector2d(5e-5, 1e-3));
    scan(best_qd, Eigen::Vector2d(5e-7, 1e-5));
    const double reaction = step_constrained(m, s, cmd, 0.01).report.wrench.norm();
    if (best < 1e-6) {
      ++feasible_count;
      CHECK(reaction < 1e-6);
    } else if (best > 1e-3) {
      CHECK(reaction > 1e-6);
    }
  }
  CHECK(feasible_count >= 100);
}

TEST_CASE("gates are reversible") {
  const MechanismModel m = gated_pair();
  JointVector q(2);
  q << 0.0, 0.0;
  MechanismState s = make_state(m, q);
  std::vector<Twist> applied;
  // x to 0.025, z through the gate, then try to move x (pinned)
  for (int k = 0; k < 83; ++k) applied.push_back(linear(0.03, 0, 0));
  for (int k = 0; k < 100; ++k) applied.push_back(linear(0, 0, 0.03));
  for (const Twist& t : applied) s = step_constrained(m, s, t, 0.01).state;
  CHECK(s.q[1] > 0.02);
  for (auto it = applied.rbegin(); it != applied.rend(); ++it) {
    s = step_constrained(m, s, -*it, 0.01).state;
  }
  CHECK(s.q.norm() < 1e-9);
}

TEST_CASE("contact change detection is debounced") {
  auto report = [](bool upper) {
    ContactReport r;
    r.blocked = {JointBlock{false, upper}};
    return r;
  };
  const std::vector<ContactReport> same = {report(false), report(false), report(false),
                                           report(false)};
  CHECK(detect_contact_change(same, 3) == ContactChange::kNone);
  const std::vector<ContactReport> flicker = {report(false), report(true), report(false),
                                              report(false)};
  CHECK(detect_contact_change(flicker, 3) == ContactChange::kNone);
  const std::vector<ContactReport> gained = {report(false), report(true), report(true),
                                             report(true)};
  CHECK(detect_contact_change(gained, 3) == ContactChange::kGained);
  const std::vector<ContactReport> lost = {report(true), report(false), report(false),
                                           report(false)};
  CHECK(detect_contact_change(lost, 3) == ContactChange::kLost);
  CHECK(detect_contact_change(report(false), report(false)) == ContactChange::kNone);

  ContactChangeDetector det(3);
  std::vector<ContactChange> seen;
  for (bool b : {false, true, false, true, true, true, true, true}) seen.push_back(det.push(report(b)));
  int gains = 0;
  for (ContactChange c : seen) gains += c == ContactChange::kGained;
  CHECK(gains == 1);
  CHECK(seen[5] == ContactChange::kGained);
}

TEST_CASE("drawer handle reaching its limit is a debounced gain") {
  auto model = std::make_shared<const MechanismModel>(bundled_mechanism("drawer_a"));
  Episode ep(model, model->zero_configuration());
  ContactChangeDetector det(3);
  int gains = 0;
  int first_gain_step = -1;
  for (int k = 0; k < 600; ++k) {
    // push along the current handle tangent
    const Jacobian jac = handle_jacobian(*model, ep.state().q);
    Twist cmd = Twist::Zero();
    cmd.head<3>() = jac.block<3, 1>(0, 1).normalized() * 0.03;
    ep.step(cmd);
    if (det.push(ep.last_report()) == ContactChange::kGained) {
      ++gains;
      if (first_gain_step < 0) first_gain_step = k;
    }
  }
  CHECK(gains >= 1);
  CHECK(ep.state().q[1] == doctest::Approx(model->joints[1].q_max));
  CHECK(first_gain_step > 0);
}

TEST_CASE("bundled fixtures load") {
  const auto names = bundled_mechanism_names();
  CHECK(names.size() == 5);
  const MechanismModel lock = bundled_mechanism("lock1");
  REQUIRE(lock.dof() == 3);
  CHECK(lock.joints[0].kind == JointKind::kPrismatic);
  CHECK(lock.joints[0].axis.isApprox(Vec3::UnitZ()));
  CHECK(lock.joints[1].kind == JointKind::kPrismatic);
  CHECK(lock.joints[2].kind == JointKind::kRevolute);
  CHECK(!lock.gates.empty());
  const MechanismModel drawer = bundled_mechanism("drawer_a");
  bool has_revolute = false, has_prismatic = false;
  for (const JointSpec& j : drawer.joints) {
    has_revolute |= j.kind == JointKind::kRevolute;
    has_prismatic |= j.kind == JointKind::kPrismatic;
  }
  CHECK(has_revolute);
  CHECK(has_prismatic);
  CHECK(bundled_mechanism("drawer_b").joints[1].q_max > drawer.joints[1].q_max);
  CHECK(code_of([] { bundled_mechanism("nope"); }) == ErrorCode::kNotFound);
}

TEST_CASE("loader errors") {
  auto doc = mechanism_to_json(bundled_mechanism("lock1"));
  CHECK(load_mechanism_json(doc).dof() == 3);

  auto bad_axis = doc;
  bad_axis["joints"][0]["axis"] = {0, 0, 2};
  CHECK(code_of([&] { load_mechanism_json(bad_axis); }) == ErrorCode::kInvariantViolation);

  auto missing = doc;
  missing.erase("joints");
  CHECK(code_of([&] { load_mechanism_json(missing); }) == ErrorCode::kSchemaError);

  auto wrong_kind = doc;
  wrong_kind["joints"][1]["kind"] = "helical";
  CHECK(code_of([&] { load_mechanism_json(wrong_kind); }) == ErrorCode::kSchemaError);

  CHECK(code_of([] { load_mechanism("{not json"); }) == ErrorCode::kSchemaError);
}

TEST_CASE("json round trip preserves the model") {
  for (const std::string& name : bundled_mechanism_names()) {
    const MechanismModel a = bundled_mechanism(name);
    const MechanismModel b = load_mechanism_json(mechanism_to_json(a));
    CHECK(mechanism_to_json(a) == mechanism_to_json(b));
  }
}
