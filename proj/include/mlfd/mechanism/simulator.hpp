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

#include <cstdint>
#include <memory>
#include <span>
#include <functional>
#include <vector>

#include "mlfd/common/random.hpp"
#include "mlfd/geometry/pose.hpp"
#include "mlfd/mechanism/model.hpp"

namespace mlfd::mechanism {

using geometry::Twist;
using geometry::Wrench;

struct MechanismState {
  JointVector q;
  bool attached = true;
  Pose ee_pose;
};

/// State with ee_pose set from forward kinematics.
MechanismState make_state(const MechanismModel& model, const JointVector& q, bool attached = true);

struct JointBlock {
  bool lower = false;
  bool upper = false;
  bool operator==(const JointBlock&) const = default;
};

enum class ContactChange { kNone, kGained, kLost };

const char* to_string(ContactChange change);

struct ContactReport {
  Wrench wrench = Wrench::Zero();
  std::vector<JointBlock> blocked;  // per joint coordinate direction
  ContactChange contact_change = ContactChange::kNone;  // raw, undebounced
};

/// One convex piece of the admissible joint set around a configuration.
struct JointBox {
  JointVector lower;
  JointVector upper;
  int gates_entered = 0;  // gates passed although staying out was possible
};

/// Enumerates the boxes obtainable by choosing, for each gate, either to keep
/// the gated joint out of its blocking interval or to hold the enabling joint
/// inside its enabling interval.
std::vector<JointBox> admissible_boxes(const MechanismModel& model, const JointVector& q);

/// Blocked flags at q: a direction is blocked when no admissible box permits
/// motion along it.
std::vector<JointBlock> blocked_directions(const MechanismModel& model, const JointVector& q);

struct StepResult {
  MechanismState state;
  ContactReport report;
  JointVector qdot;
  Twist realized = Twist::Zero();
};

/// Quasi-static step: the joint velocity minimizing the weighted twist error
/// within the admissible set, its integration, and the reaction wrench.
StepResult step_constrained(const MechanismModel& model, const MechanismState& state,
                            const Twist& command, double dt);

/// Debounced change over the trailing window of reports (oldest first): a
/// direction free h_c steps ago and blocked in each of the last h_c reports
/// yields kGained; the symmetric case yields kLost.
ContactChange detect_contact_change(std::span<const ContactReport> history, int h_c = 3);

/// Convenience overload for two reports; only meaningful with h_c = 1.
ContactChange detect_contact_change(const ContactReport& prev, const ContactReport& cur,
                                    int h_c = 1);

class ContactChangeDetector {
 public:
  explicit ContactChangeDetector(int h_c = 3);

  ContactChange push(const ContactReport& report);
  void reset();
  int debounce() const { return h_c_; }

 private:
  int h_c_;
  std::vector<ContactReport> window_;
};

/// A single simulated interaction with one mechanism instance.
class Episode {
 public:
  Episode(std::shared_ptr<const MechanismModel> model, const JointVector& q0, double dt = 0.01);

  const MechanismModel& model() const { return *model_; }
  std::shared_ptr<const MechanismModel> model_ptr() const { return model_; }
  const MechanismState& state() const { return state_; }
  const ContactReport& last_report() const { return report_; }
  const Twist& last_realized() const { return realized_; }
  double time() const { return time_; }
  double dt() const { return dt_; }
  long steps() const { return steps_; }

  // Grasp or release the handle; stepping requires an attached tool.
  void set_attached(bool attached) { state_.attached = attached; }
  void set_sensor_noise(double stddev, std::uint64_t seed);
  /// Last reaction wrench with additive sensor noise.
  Wrench measured_wrench();

  const StepResult& step(const Twist& command);
  // Called after every step, e.g. to stream frames.
  void set_observer(std::function<void(const Episode&)> observer) { observer_ = std::move(observer); }

 private:
  std::shared_ptr<const MechanismModel> model_;
  MechanismState state_;
  ContactReport report_;
  Twist realized_ = Twist::Zero();
  StepResult last_;
  double dt_;
  double time_ = 0.0;
  long steps_ = 0;
  double noise_stddev_ = 0.0;
  Rng noise_rng_{0};
  std::function<void(const Episode&)> observer_;
};

}  // namespace mlfd::mechanism
