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
#include <string>
#include <vector>

#include <json.hpp>

namespace mlfd::harness {

struct PoseRandomization {
  double translation = 0.05;  // m, uniform in [-t, t] along x and y
  double yaw = 0.5235987755982988;  // rad, uniform in [-yaw, yaw]
  double tilt = 0.0;          // rad, about a random horizontal axis
};

/// The object is moved once when the tool first comes within the trigger
/// distance of the handle.
struct PoseChangeEvent {
  bool enabled = false;
  double trigger_distance = 0.15;  // m
  double translation = 0.03;       // m, uniform in [-t, t] along x and y
  double yaw = 0.5235987755982988; // rad
};

struct ScenarioConfig {
  std::string fixture = "lock1";
  // Fixture whose demonstration provides the plan; empty means fixture.
  std::string plan_fixture;
  PoseRandomization randomization;
  PoseChangeEvent pose_change;
  int distractors = 0;
  int trials = 10;
  std::uint64_t seed = 0;
  double grasp_yaw_error = 0.05235987755982988;  // rad, perceived grasp error in open trials
  double wrench_noise = 0.2;                     // N, force sensor stddev
  double light_min = 1.0;
  double light_max = 1.0;
  bool degraded_detection = false;
  bool start_out_of_view = false;

  const std::string& demo_fixture() const { return plan_fixture.empty() ? fixture : plan_fixture; }
  /// Throws ConfigError.
  void validate() const;
};

enum class Task { kGrasp, kOpen, kFullTask };
enum class Method { kAugmented, kBaseline };

const char* to_string(Task task);
const char* to_string(Method method);
Task task_from_string(const std::string& s);
Method method_from_string(const std::string& s);

struct SuiteEntry {
  Task task = Task::kOpen;
  Method method = Method::kAugmented;
  ScenarioConfig scenario;
};

struct SuiteConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<SuiteEntry> entries;

  /// Throws ConfigError.
  void validate() const;
};

/// Per-entry seeds are derived from the suite seed and the entry position.
SuiteConfig table1_suite(std::uint64_t seed, int trials = 10);

/// Scenario presets shared by the default suite and the acceptance checks.
ScenarioConfig grasp_scenario(const std::string& fixture);
ScenarioConfig open_scenario(const std::string& fixture);
ScenarioConfig full_task_scenario(const std::string& fixture);

nlohmann::json scenario_to_json(const ScenarioConfig& c);
/// The seed field is mandatory. Throws ConfigError.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json suite_to_json(const SuiteConfig& s);
/// Throws ConfigError.
SuiteConfig suite_from_json(const nlohmann::json& j);
SuiteConfig load_suite_file(const std::string& path);

}  // namespace mlfd::harness
