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
#include "mlfd/control/sequencer.hpp"
#include "mlfd/demo/segmentation.hpp"
#include "mlfd/mechanism/simulator.hpp"

namespace mlfd::demo {

/// Where a force candidate comes from.
enum class HypothesisSource { kNextMotion, kPreviousMotion, kGravity, kNone };

const char* to_string(HypothesisSource source);

struct ForceCandidate {
  Vec3 direction = Vec3::Zero();
  HypothesisSource source = HypothesisSource::kNone;
};

inline const Vec3 kGravityDirection{0.0, 0.0, -1.0};

/// Candidates for segment i (1-based) in the order next motion, previous
/// motion, gravity; undefined neighbours are skipped.
std::vector<ForceCandidate> hypothesize_forces(int i, const std::vector<Segment>& segments);

enum class Verdict { kValid, kMoved, kSkipped };

const char* to_string(Verdict verdict);

struct ForceHypothesisResult {
  int segment = 0;
  ForceCandidate candidate;
  double displacement = 0.0;  // largest excursion during the push, m
  Verdict verdict = Verdict::kSkipped;
};

struct AugmentParams {
  double push_force = 5.0;      // N
  double eval_duration = 1.0;   // s
  double move_tolerance = 0.005;  // m
  double lateral_deadband = 1.0;  // N, force error across the push ignored
  double arrive_tolerance = 0.003;  // m, distance to the next start position
  double phase_timeout = 20.0;  // s
  double restore_gain = 5.0;    // 1/s
  double restore_speed = 0.05;  // m/s
  double restore_timeout = 2.0; // s
  control::CompliantControllerSpec controller;  // gains for evaluation and transit
  // Progress hooks: before each evaluation and after its verdict.
  std::function<void(int segment, const ForceCandidate&)> on_candidate;
  std::function<void(const ForceHypothesisResult&)> on_result;
};

/// Pushes along the candidate with a pure force-regulating controller, then
/// returns the end effector to where it started. Throws NotAttached, and
/// RestoreFailure when the start cannot be recovered within 2 * move_tolerance.
ForceHypothesisResult evaluate_force_hypothesis(mechanism::Episode& episode,
                                                const ForceCandidate& candidate,
                                                const AugmentParams& params = {});

struct PlanStep {
  Vec3 motion_dir = Vec3::UnitX();
  Vec3 force_dir = Vec3::Zero();
  HypothesisSource source = HypothesisSource::kNone;
  Vec3 start = Vec3::Zero();
  std::vector<ForceHypothesisResult> evaluations;
  mechanism::JointVector q_eval;  // configuration the candidates were evaluated at
};

struct AugmentedPlan {
  std::vector<PlanStep> steps;
  Pose reference_grasp;  // end-effector pose the directions are expressed against
  std::vector<std::string> warnings;
};

/// Algorithm 1: per segment, keep the first candidate that does not move the
/// mechanism, then drive to the next segment's start with the compliant
/// controller (never by replaying positions). Throws TransitFailure.
AugmentedPlan augment_contact(mechanism::Episode& episode, const std::vector<Segment>& segments,
                              const AugmentParams& params = {});

/// Plan without force directions, all motion directions from the segments.
AugmentedPlan motion_only_plan(const std::vector<Segment>& segments, const Pose& reference_grasp);

/// Controllers for a new execution grasped at grasp_pose. Motion and
/// neighbour-derived force directions follow the grasp frame; gravity stays
/// fixed in the world.
control::SequencerSpec plan_to_sequencer(const AugmentedPlan& plan, const Pose& grasp_pose,
                                         const control::CompliantControllerSpec& gains = {},
                                         double timeout = 60.0);

}  // namespace mlfd::demo
