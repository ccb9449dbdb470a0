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

#include <functional>
#include <string>
#include <vector>

#include "mlfd/control/compliant.hpp"
#include "mlfd/control/pbvs.hpp"
#include "mlfd/mechanism/simulator.hpp"

namespace mlfd::control {

struct PhaseTermination {
  bool on_gained = true;
  bool on_lost = false;
  bool on_goal = false;
};

struct PhaseSpec {
  CompliantControllerSpec controller;
  PhaseTermination termination;
};

struct SequencerSpec {
  std::vector<PhaseSpec> phases;
  double timeout = 60.0;  // s
  int debounce = 3;       // steps
};

enum class TerminationStatus { kRunning, kDone, kFailed };

struct Termination {
  TerminationStatus status = TerminationStatus::kRunning;
  std::string reason;  // "reached", "collided", "timeout", "gained", "lost", "goal"
};

/// Servo termination: done within tolerances, failed on collision or timeout.
Termination detect_termination(const ServoGoal& goal, const Pose& current, double contact_force,
                               double elapsed, double timeout, double collision_threshold = 10.0);

/// Phase termination from the debounced contact change and the goal predicate.
Termination detect_termination(const PhaseTermination& phase, bool goal_satisfied,
                               mechanism::ContactChange debounced, double elapsed,
                               double timeout);

struct TraceFrame {
  double t = 0.0;
  int phase = 0;
  mechanism::JointVector q;
  Vec3 ee_position = Vec3::Zero();
  Vec3 command = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  Vec3 motion_dir = Vec3::Zero();
  mechanism::ContactChange event = mechanism::ContactChange::kNone;
};

struct PhaseSwitch {
  int from = 0;
  int to = 1;
  double t = 0.0;
  mechanism::ContactChange cause = mechanism::ContactChange::kGained;
};

struct SequencerResult {
  bool success = false;
  std::string reason;  // "goal" or "timeout"
  double duration = 0.0;
  int final_phase = 0;
  std::vector<PhaseSwitch> switches;
  std::vector<TraceFrame> trace;
};

struct SequencerOptions {
  bool record_trace = true;
  int trace_stride = 1;
  // Sees every frame regardless of stride and record_trace.
  std::function<void(const TraceFrame&)> on_frame;
};

/// Runs the phases in order on the episode until the mechanism goal holds or
/// the global timeout elapses. Phase switches never go backwards. Contact
/// changes are debounced over the joint directions that move the handle along
/// the phase's current motion estimate.
SequencerResult run_sequencer(const SequencerSpec& spec, mechanism::Episode& episode,
                              const SequencerOptions& options = {});

}  // namespace mlfd::control
