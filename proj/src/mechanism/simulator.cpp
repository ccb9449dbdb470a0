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

#include "mlfd/mechanism/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlfd/common/error.hpp"
#include "mlfd/mechanism/box_lsq.hpp"
#include "mlfd/mechanism/kinematics.hpp"

namespace mlfd::mechanism {

namespace {

constexpr double kBlockTol = 1e-9;

bool inside_open(double x, double lo, double hi) {
  return x > lo + kBlockTol && x < hi - kBlockTol;
}

bool inside_closed(double x, double lo, double hi) {
  return x >= lo - kBlockTol && x <= hi + kBlockTol;
}

}  // namespace

MechanismState make_state(const MechanismModel& model, const JointVector& q, bool attached) {
  MechanismState s;
  s.q = q;
  s.attached = attached;
  s.ee_pose = forward_kinematics(model, q);
  return s;
}

const char* to_string(ContactChange change) {
  switch (change) {
    case ContactChange::kGained: return "gained";
    case ContactChange::kLost: return "lost";
    case ContactChange::kNone: break;
  }
  return "none";
}

std::vector<JointBox> admissible_boxes(const MechanismModel& model, const JointVector& q) {
  const std::size_t n_gates = model.gates.size();
  std::vector<JointBox> boxes;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n_gates); ++mask) {
    JointBox box{model.lower_limits(), model.upper_limits(), 0};
    bool available = true;
    for (std::size_t g = 0; g < n_gates && available; ++g) {
      const GateSpec& gate = model.gates[g];
      const double x = q[gate.gated_joint];
      const bool inside = inside_open(x, gate.block_lo, gate.block_hi);
      if ((mask >> g) & 1u) {
        // pass through: hold the enabler inside its interval
        const double e = q[gate.enabling_joint];
        if (!inside_closed(e, gate.enable_lo, gate.enable_hi)) {
          available = false;
          break;
        }
        box.lower[gate.enabling_joint] = std::max(box.lower[gate.enabling_joint], gate.enable_lo);
        box.upper[gate.enabling_joint] = std::min(box.upper[gate.enabling_joint], gate.enable_hi);
        if (!inside) ++box.gates_entered;
      } else {
        // stay out: keep the gated joint on its current side
        if (inside) {
          available = false;
          break;
        }
        if (x <= gate.block_lo + kBlockTol) {
          box.upper[gate.gated_joint] = std::min(box.upper[gate.gated_joint], gate.block_lo);
        } else {
          box.lower[gate.gated_joint] = std::max(box.lower[gate.gated_joint], gate.block_hi);
        }
      }
    }
    if (!available) continue;
    // The current configuration is always inside its own admissible set; widen
    // by the tolerance slack so boundary round-off never empties a box.
    for (Eigen::Index j = 0; j < q.size(); ++j) {
      box.lower[j] = std::min(box.lower[j], q[j]);
      box.upper[j] = std::max(box.upper[j], q[j]);
    }
    boxes.push_back(std::move(box));
  }
  if (boxes.empty()) {
    throw Error(ErrorCode::kInvariantViolation, "configuration lies inside a closed gate");
  }
  return boxes;
}

std::vector<JointBlock> blocked_directions(const MechanismModel& model, const JointVector& q) {
  const std::vector<JointBox> boxes = admissible_boxes(model, q);
  std::vector<JointBlock> blocked(model.dof(), JointBlock{true, true});
  for (const JointBox& box : boxes) {
    for (std::size_t j = 0; j < model.dof(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      if (box.lower[i] < q[i] - kBlockTol) blocked[j].lower = false;
      if (box.upper[i] > q[i] + kBlockTol) blocked[j].upper = false;
    }
  }
  return blocked;
}

StepResult step_constrained(const MechanismModel& model, const MechanismState& state,
                            const Twist& command, double dt) {
  if (!state.attached) throw Error(ErrorCode::kNotAttached, "end effector is not attached");
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  const JointVector& q = state.q;
  if (static_cast<std::size_t>(q.size()) != model.dof()) {
    throw Error(ErrorCode::kInvalidArgument, "joint vector size mismatch");
  }

  const Jacobian jac = handle_jacobian(model, q);
  Eigen::Matrix<double, 6, 1> sqrt_w;
  const double rw = std::sqrt(model.rotation_weight);
  sqrt_w << 1.0, 1.0, 1.0, rw, rw, rw;
  const Eigen::MatrixXd a = sqrt_w.asDiagonal() * jac;
  const Eigen::VectorXd b = sqrt_w.asDiagonal() * command;
  const double entry_cost = model.gate_entry_speed * model.gate_entry_speed;

  const std::vector<JointBox> boxes = admissible_boxes(model, q);
  JointVector best_qdot = JointVector::Zero(q.size());
  double best_cost = std::numeric_limits<double>::infinity();
  for (const JointBox& box : boxes) {
    const Eigen::VectorXd lo = (box.lower - q) / dt;
    const Eigen::VectorXd hi = (box.upper - q) / dt;
    const BoxLsqResult sol = solve_box_lsq(a, b, lo, hi);
    if (!sol.feasible) continue;
    const double cost = sol.cost + entry_cost * box.gates_entered;
    if (cost < best_cost - 1e-15) {
      best_cost = cost;
      best_qdot = sol.x;
    }
  }

  const JointVector q_new =
      (q + best_qdot * dt).cwiseMax(model.lower_limits()).cwiseMin(model.upper_limits());
  StepResult out;
  out.qdot = (q_new - q) / dt;
  out.realized = jac * out.qdot;
  out.state = make_state(model, q_new, true);

  Eigen::Matrix<double, 6, 1> w;
  w << 1.0, 1.0, 1.0, model.rotation_weight, model.rotation_weight, model.rotation_weight;
  out.report.wrench = model.reaction_stiffness * w.cwiseProduct(command - out.realized);

  const std::vector<JointBlock> before = blocked_directions(model, q);
  out.report.blocked = blocked_directions(model, q_new);
  bool gained = false;
  bool lost = false;
  for (std::size_t j = 0; j < before.size(); ++j) {
    gained |= (!before[j].lower && out.report.blocked[j].lower) ||
              (!before[j].upper && out.report.blocked[j].upper);
    lost |= (before[j].lower && !out.report.blocked[j].lower) ||
            (before[j].upper && !out.report.blocked[j].upper);
  }
  out.report.contact_change =
      gained ? ContactChange::kGained : (lost ? ContactChange::kLost : ContactChange::kNone);
  return out;
}

ContactChange detect_contact_change(std::span<const ContactReport> history, int h_c) {
  if (h_c < 1) throw Error(ErrorCode::kInvalidArgument, "debounce count must be >= 1");
  const auto n = static_cast<int>(history.size());
  if (n < h_c + 1) return ContactChange::kNone;
  const ContactReport& ref = history[static_cast<std::size_t>(n - h_c - 1)];
  const std::size_t dof = ref.blocked.size();
  bool gained = false;
  bool lost = false;
  for (std::size_t j = 0; j < dof; ++j) {
    for (int side = 0; side < 2; ++side) {
      auto flag = [&](const ContactReport& r) {
        if (r.blocked.size() != dof) {
          throw Error(ErrorCode::kInvalidArgument, "reports from different mechanisms");
        }
        return side == 0 ? r.blocked[j].lower : r.blocked[j].upper;
      };
      const bool was = flag(ref);
      bool all_blocked = true;
      bool all_free = true;
      for (int k = n - h_c; k < n; ++k) {
        const bool f = flag(history[static_cast<std::size_t>(k)]);
        all_blocked &= f;
        all_free &= !f;
      }
      // Only the step that completes the run counts, so each event fires once.
      const bool entered_run = flag(history[static_cast<std::size_t>(n - h_c)]) != was;
      if (!was && all_blocked && entered_run) gained = true;
      if (was && all_free && entered_run) lost = true;
    }
  }
  if (gained) return ContactChange::kGained;
  if (lost) return ContactChange::kLost;
  return ContactChange::kNone;
}

ContactChange detect_contact_change(const ContactReport& prev, const ContactReport& cur, int h_c) {
  const ContactReport pair[2] = {prev, cur};
  return detect_contact_change(std::span<const ContactReport>(pair, 2), h_c);
}

ContactChangeDetector::ContactChangeDetector(int h_c) : h_c_(h_c) {
  if (h_c < 1) throw Error(ErrorCode::kInvalidArgument, "debounce count must be >= 1");
}

ContactChange ContactChangeDetector::push(const ContactReport& report) {
  window_.push_back(report);
  if (window_.size() > static_cast<std::size_t>(h_c_ + 1)) window_.erase(window_.begin());
  return detect_contact_change(window_, h_c_);
}

void ContactChangeDetector::reset() { window_.clear(); }

Episode::Episode(std::shared_ptr<const MechanismModel> model, const JointVector& q0, double dt)
    : model_(std::move(model)), dt_(dt) {
  if (!model_) throw Error(ErrorCode::kInvalidArgument, "episode needs a model");
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  state_ = make_state(*model_, q0, true);
  report_.blocked = blocked_directions(*model_, q0);
}

void Episode::set_sensor_noise(double stddev, std::uint64_t seed) {
  noise_stddev_ = stddev;
  noise_rng_ = Rng(seed);
}

Wrench Episode::measured_wrench() {
  Wrench w = report_.wrench;
  if (noise_stddev_ > 0.0) {
    for (int i = 0; i < 3; ++i) w[i] += noise_rng_.normal(0.0, noise_stddev_);
  }
  return w;
}

const StepResult& Episode::step(const Twist& command) {
  last_ = step_constrained(*model_, state_, command, dt_);
  state_ = last_.state;
  report_ = last_.report;
  realized_ = last_.realized;
  time_ += dt_;
  ++steps_;
  if (observer_) observer_(*this);
  return last_;
}

}  // namespace mlfd::mechanism
