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

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mlfd/common/random.hpp"
#include "mlfd/demo/augment.hpp"
#include "mlfd/demo/trajectory.hpp"
#include "mlfd/harness/config.hpp"
#include "mlfd/perception/grasp.hpp"

namespace mlfd::harness {

/// Everything learned from one fixture's demonstration: the contact plan and
/// both grasp estimators.
struct FixturePrep {
  std::shared_ptr<const mechanism::MechanismModel> model;
  demo::DemoTrajectory demo;
  std::vector<demo::Segment> segments;
  demo::AugmentedPlan plan;
  perception::TargetEstimator augmented;  // funnel dataset
  perception::TargetEstimator demo_only;  // approach images only
};

FixturePrep prepare_fixture(const std::string& name);

/// Lazily prepared fixtures, shared across trials and threads.
class PrepCache {
 public:
  std::shared_ptr<const FixturePrep> get(const std::string& name);

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const FixturePrep>> cache_;
};

struct TrialResult {
  std::string fixture;
  Task task = Task::kOpen;
  Method method = Method::kAugmented;
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  std::string failure_reason;  // empty on success
  bool grasp_success = false;
  bool open_success = false;
  double grasp_duration = 0.0;  // simulated s
  double open_duration = 0.0;   // simulated s
  bool gate_phase_failure = false;
  int search_waypoints = 0;
  int phase_switches = 0;
  double grasp_position_error = 0.0;  // m
  double grasp_yaw_error = 0.0;       // rad
  std::string trace_ref;
};

/// Demonstration-force baseline: each step's force direction as read from a
/// noisy demonstrated wrench, i.e. the constraint direction rotated 60
/// degrees about a random perpendicular axis, or absent with probability 0.5.
demo::AugmentedPlan demo_forces_plan(const demo::AugmentedPlan& plan, Rng& rng);

std::vector<TrialResult> run_grasp_trials(const ScenarioConfig& config, Method method, PrepCache& cache);
std::vector<TrialResult> run_open_trials(const ScenarioConfig& config, Method method, PrepCache& cache);
std::vector<TrialResult> run_full_task(const ScenarioConfig& config, Method method, PrepCache& cache);

std::vector<TrialResult> run_entry(const SuiteEntry& entry, PrepCache& cache);
std::vector<TrialResult> run_suite(const SuiteConfig& suite, PrepCache& cache);

nlohmann::json trial_to_json(const TrialResult& r);

}  // namespace mlfd::harness
