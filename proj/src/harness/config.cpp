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

#include "mlfd/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mlfd/common/error.hpp"
#include "mlfd/common/random.hpp"
#include "mlfd/geometry/pose.hpp"
#include "mlfd/mechanism/loader.hpp"

namespace mlfd::harness {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfigError, what); }

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("field '") + key + "': " + e.what());
  }
}

double read_deg(const json& j, const char* key, double fallback_rad) {
  double deg = geometry::rad_to_deg(fallback_rad);
  read(j, key, deg);
  return geometry::deg_to_rad(deg);
}

}  // namespace

void ScenarioConfig::validate() const {
  const auto names = mechanism::bundled_mechanism_names();
  auto known = [&](const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  if (!known(fixture)) config_error("unknown fixture '" + fixture + "'");
  if (!plan_fixture.empty() && !known(plan_fixture)) {
    config_error("unknown plan fixture '" + plan_fixture + "'");
  }
  if (trials < 0) config_error("trials must be non-negative");
  if (distractors < 0 || distractors > 32) config_error("distractors must be in [0, 32]");
  if (randomization.translation < 0.0 || randomization.yaw < 0.0 || randomization.tilt < 0.0) {
    config_error("randomization ranges must be non-negative");
  }
  if (pose_change.trigger_distance < 0.0 || pose_change.translation < 0.0 || pose_change.yaw < 0.0) {
    config_error("pose change ranges must be non-negative");
  }
  if (grasp_yaw_error < 0.0 || wrench_noise < 0.0) config_error("noise levels must be non-negative");
  if (!(light_min > 0.0) || light_max > 1.0 || light_min > light_max) {
    config_error("light range must satisfy 0 < min <= max <= 1");
  }
}

const char* to_string(Task task) {
  switch (task) {
    case Task::kGrasp: return "grasp";
    case Task::kOpen: return "open";
    case Task::kFullTask: return "full_task";
  }
  return "?";
}

const char* to_string(Method method) {
  return method == Method::kAugmented ? "augmented" : "baseline";
}

Task task_from_string(const std::string& s) {
  if (s == "grasp") return Task::kGrasp;
  if (s == "open") return Task::kOpen;
  if (s == "full_task") return Task::kFullTask;
  config_error("unknown task '" + s + "'");
}

Method method_from_string(const std::string& s) {
  if (s == "augmented") return Method::kAugmented;
  if (s == "baseline") return Method::kBaseline;
  config_error("unknown method '" + s + "'");
}

void SuiteConfig::validate() const {
  if (name.empty()) config_error("suite needs a name");
  for (const SuiteEntry& e : entries) e.scenario.validate();
}

ScenarioConfig grasp_scenario(const std::string& fixture) {
  ScenarioConfig c;
  c.fixture = fixture;
  c.randomization = {0.05, M_PI, 0.0};  // any knob orientation
  c.pose_change.enabled = true;
  c.distractors = 4;
  c.light_min = 0.6;
  return c;
}

ScenarioConfig open_scenario(const std::string& fixture) {
  ScenarioConfig c;
  c.fixture = fixture;
  c.randomization = {0.05, geometry::deg_to_rad(30.0), geometry::deg_to_rad(2.0)};
  return c;
}

ScenarioConfig full_task_scenario(const std::string& fixture) {
  ScenarioConfig c = grasp_scenario(fixture);
  // The third lock's knob is the low-contrast one.
  c.degraded_detection = fixture == "lock3";
  return c;
}

SuiteConfig table1_suite(std::uint64_t seed, int trials) {
  SuiteConfig s;
  s.name = "table1";
  s.seed = seed;
  const std::vector<std::string> locks{"lock1", "lock2", "lock3"};
  for (Method method : {Method::kAugmented, Method::kBaseline}) {
    for (Task task : {Task::kGrasp, Task::kOpen, Task::kFullTask}) {
      for (const std::string& lock : locks) {
        SuiteEntry e;
        e.task = task;
        e.method = method;
        e.scenario = task == Task::kGrasp  ? grasp_scenario(lock)
                     : task == Task::kOpen ? open_scenario(lock)
                                           : full_task_scenario(lock);
        e.scenario.trials = trials;
        s.entries.push_back(e);
      }
    }
  }
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    s.entries[i].scenario.seed = Rng::derive(seed, i).next_u64();
  }
  return s;
}

json scenario_to_json(const ScenarioConfig& c) {
  json j = {
      {"fixture", c.fixture},
      {"trials", c.trials},
      {"seed", c.seed},
      {"distractors", c.distractors},
      {"randomization",
       {{"translation", c.randomization.translation},
        {"yaw_deg", geometry::rad_to_deg(c.randomization.yaw)},
        {"tilt_deg", geometry::rad_to_deg(c.randomization.tilt)}}},
      {"pose_change",
       {{"enabled", c.pose_change.enabled},
        {"trigger_distance", c.pose_change.trigger_distance},
        {"translation", c.pose_change.translation},
        {"yaw_deg", geometry::rad_to_deg(c.pose_change.yaw)}}},
      {"grasp_yaw_error_deg", geometry::rad_to_deg(c.grasp_yaw_error)},
      {"wrench_noise", c.wrench_noise},
      {"light", {c.light_min, c.light_max}},
      {"degraded_detection", c.degraded_detection},
      {"start_out_of_view", c.start_out_of_view},
  };
  if (!c.plan_fixture.empty()) j["plan_fixture"] = c.plan_fixture;
  return j;
}

ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) config_error("scenario must be an object");
  if (!j.contains("seed")) config_error("scenario needs a seed");
  ScenarioConfig c;
  read(j, "fixture", c.fixture);
  read(j, "plan_fixture", c.plan_fixture);
  read(j, "trials", c.trials);
  read(j, "seed", c.seed);
  read(j, "distractors", c.distractors);
  if (j.contains("randomization")) {
    const json& r = j["randomization"];
    read(r, "translation", c.randomization.translation);
    c.randomization.yaw = read_deg(r, "yaw_deg", c.randomization.yaw);
    c.randomization.tilt = read_deg(r, "tilt_deg", c.randomization.tilt);
  }
  if (j.contains("pose_change")) {
    const json& p = j["pose_change"];
    read(p, "enabled", c.pose_change.enabled);
    read(p, "trigger_distance", c.pose_change.trigger_distance);
    read(p, "translation", c.pose_change.translation);
    c.pose_change.yaw = read_deg(p, "yaw_deg", c.pose_change.yaw);
  }
  c.grasp_yaw_error = read_deg(j, "grasp_yaw_error_deg", c.grasp_yaw_error);
  read(j, "wrench_noise", c.wrench_noise);
  if (j.contains("light")) {
    std::vector<double> light;
    read(j, "light", light);
    if (light.size() != 2) config_error("light must be [min, max]");
    c.light_min = light[0];
    c.light_max = light[1];
  }
  read(j, "degraded_detection", c.degraded_detection);
  read(j, "start_out_of_view", c.start_out_of_view);
  c.validate();
  return c;
}

json suite_to_json(const SuiteConfig& s) {
  json entries = json::array();
  for (const SuiteEntry& e : s.entries) {
    entries.push_back({{"task", to_string(e.task)},
                       {"method", to_string(e.method)},
                       {"scenario", scenario_to_json(e.scenario)}});
  }
  return {{"name", s.name}, {"seed", s.seed}, {"entries", entries}};
}

SuiteConfig suite_from_json(const json& j) {
  if (!j.is_object()) config_error("suite must be an object");
  if (!j.contains("seed")) config_error("suite needs a seed");
  SuiteConfig s;
  read(j, "name", s.name);
  read(j, "seed", s.seed);
  if (!j.contains("entries") || !j["entries"].is_array()) config_error("suite needs an entries array");
  for (const json& e : j["entries"]) {
    if (!e.is_object()) config_error("suite entry must be an object");
    SuiteEntry entry;
    std::string task = "open";
    std::string method = "augmented";
    read(e, "task", task);
    read(e, "method", method);
    entry.task = task_from_string(task);
    entry.method = method_from_string(method);
    if (!e.contains("scenario")) config_error("suite entry needs a scenario");
    entry.scenario = scenario_from_json(e["scenario"]);
    s.entries.push_back(entry);
  }
  s.validate();
  return s;
}

SuiteConfig load_suite_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  try {
    return suite_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    config_error(path + ": " + e.what());
  }
}

}  // namespace mlfd::harness
