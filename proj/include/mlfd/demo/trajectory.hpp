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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlfd/geometry/pose.hpp"
#include "mlfd/mechanism/model.hpp"

namespace mlfd::demo {

using geometry::Pose;
using geometry::Vec3;
using geometry::Wrench;

struct DemoSample {
  double t = 0.0;
  Pose ee_pose;
  Wrench wrench = Wrench::Zero();
  double gripper = 0.0;  // opening, m
};

enum class DemoSource { kHumanUi, kScripted };

struct DemoTrajectory {
  std::vector<DemoSample> samples;
  DemoSource source = DemoSource::kScripted;
  std::optional<std::size_t> grasp_index;

  /// Throws InvalidArgument unless t is strictly increasing with >= 2 samples.
  void validate() const;
  /// Explicit index, else the first sample after the gripper closes, else the
  /// first sample (a manipulation-only demonstration starts at the grasp).
  std::size_t resolved_grasp_index() const;
  Pose grasp_pose() const { return samples.at(resolved_grasp_index()).ee_pose; }
  std::vector<Vec3> positions(std::size_t from = 0) const;
};

nlohmann::json demo_to_json(const DemoTrajectory& demo);
/// Throws SchemaError on malformed input and InvalidArgument on invariant violations.
DemoTrajectory demo_from_json(const nlohmann::json& doc);

struct ScriptedDemoOptions {
  double rate = 100.0;            // Hz
  double approach_height = 0.35;  // m above the grasp pose
  double approach_speed = 0.05;   // m/s
  double open_width = 0.08;       // gripper opening before grasp, m
};

/// Approach from above, grasp, then the fixture's joint-space waypoints at its
/// demonstration speed. Throws InvalidArgument if the model has no script.
DemoTrajectory scripted_demo(const mechanism::MechanismModel& model,
                             const ScriptedDemoOptions& options = {});

}  // namespace mlfd::demo
