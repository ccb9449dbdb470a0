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

#include "mlfd/demo/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "mlfd/common/error.hpp"
#include "mlfd/mechanism/kinematics.hpp"
#include "mlfd/mechanism/loader.hpp"

namespace mlfd::demo {

using nlohmann::json;

void DemoTrajectory::validate() const {
  if (samples.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "demonstration needs at least 2 samples");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw Error(ErrorCode::kInvalidArgument, "demonstration time stamps must increase");
    }
  }
  if (grasp_index && *grasp_index >= samples.size()) {
    throw Error(ErrorCode::kInvalidArgument, "grasp index beyond the last sample");
  }
}

std::size_t DemoTrajectory::resolved_grasp_index() const {
  if (grasp_index) return *grasp_index;
  double widest = 0.0;
  for (const DemoSample& s : samples) widest = std::max(widest, s.gripper);
  if (widest > 0.0) {
    bool was_open = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const bool open = samples[i].gripper > 0.75 * widest;
      if (was_open && !open) return i;
      was_open |= open;
    }
  }
  return 0;
}

std::vector<Vec3> DemoTrajectory::positions(std::size_t from) const {
  std::vector<Vec3> out;
  for (std::size_t i = from; i < samples.size(); ++i) out.push_back(samples[i].ee_pose.translation());
  return out;
}

json demo_to_json(const DemoTrajectory& demo) {
  json doc;
  doc["source"] = demo.source == DemoSource::kHumanUi ? "human-ui" : "scripted";
  if (demo.grasp_index) doc["grasp_index"] = *demo.grasp_index;
  json samples = json::array();
  for (const DemoSample& s : demo.samples) {
    json w = json::array();
    for (int i = 0; i < 6; ++i) w.push_back(s.wrench[i]);
    samples.push_back({{"t", s.t},
                       {"ee_pose", mechanism::pose_to_json(s.ee_pose)},
                       {"wrench", w},
                       {"gripper", s.gripper}});
  }
  doc["samples"] = samples;
  return doc;
}

DemoTrajectory demo_from_json(const json& doc) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kSchemaError, what); };
  if (!doc.is_object()) fail("demonstration must be an object");
  DemoTrajectory demo;
  if (doc.contains("source")) {
    const json& src = doc["source"];
    if (src == "human-ui") {
      demo.source = DemoSource::kHumanUi;
    } else if (src == "scripted") {
      demo.source = DemoSource::kScripted;
    } else {
      fail("source must be 'human-ui' or 'scripted'");
    }
  }
  if (doc.contains("grasp_index")) {
    if (!doc["grasp_index"].is_number_unsigned()) fail("grasp_index must be a non-negative integer");
    demo.grasp_index = doc["grasp_index"].get<std::size_t>();
  }
  if (!doc.contains("samples") || !doc["samples"].is_array()) fail("samples must be an array");
  for (const json& s : doc["samples"]) {
    if (!s.is_object() || !s.contains("t") || !s["t"].is_number() || !s.contains("ee_pose")) {
      fail("each sample needs numeric t and ee_pose");
    }
    DemoSample sample;
    sample.t = s["t"].get<double>();
    sample.ee_pose = mechanism::pose_from_json(s["ee_pose"]);
    if (s.contains("wrench")) {
      const json& w = s["wrench"];
      if (!w.is_array() || w.size() != 6) fail("wrench must have 6 numbers");
      for (int i = 0; i < 6; ++i) {
        if (!w[i].is_number()) fail("wrench must have 6 numbers");
        sample.wrench[i] = w[i].get<double>();
      }
    }
    if (s.contains("gripper")) {
      if (!s["gripper"].is_number()) fail("gripper must be a number");
      sample.gripper = s["gripper"].get<double>();
    }
    demo.samples.push_back(sample);
  }
  demo.validate();
  return demo;
}

DemoTrajectory scripted_demo(const mechanism::MechanismModel& model,
                             const ScriptedDemoOptions& options) {
  if (model.demo_waypoints.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "mechanism '" + model.name + "' has no demonstration script");
  }
  const double dt = 1.0 / options.rate;
  DemoTrajectory demo;
  demo.source = DemoSource::kScripted;
  const Pose grasp = mechanism::forward_kinematics(model, model.demo_waypoints.front());
  double t = 0.0;
  auto push = [&](const Pose& pose, double gripper) {
    demo.samples.push_back({t, pose, Wrench::Zero(), gripper});
    t += dt;
  };

  // Straight-down approach along the grasp frame's -z (the tool axis).
  const Vec3 above = grasp * Vec3(0.0, 0.0, -options.approach_height);
  const int n_approach =
      std::max(2, static_cast<int>(std::ceil(options.approach_height / (options.approach_speed * dt))));
  for (int k = 0; k < n_approach; ++k) {
    const double s = static_cast<double>(k) / n_approach;
    push(Pose(grasp.rotation(), above + s * (grasp.translation() - above)), options.open_width);
  }
  // Close the gripper on the handle over 0.2 s.
  const int n_close = static_cast<int>(std::round(0.2 * options.rate));
  const double closed = model.appearance.object_width;
  for (int k = 0; k <= n_close; ++k) {
    const double s = static_cast<double>(k) / n_close;
    push(grasp, options.open_width + s * (closed - options.open_width));
  }
  demo.grasp_index = demo.samples.size() - 1;

  for (std::size_t w = 1; w < model.demo_waypoints.size(); ++w) {
    const mechanism::JointVector& a = model.demo_waypoints[w - 1];
    const mechanism::JointVector& b = model.demo_waypoints[w];
    // Duration from the handle path length, sampled finely.
    double length = 0.0;
    Vec3 prev = mechanism::forward_kinematics(model, a).translation();
    for (int k = 1; k <= 100; ++k) {
      const Vec3 p = mechanism::forward_kinematics(model, a + (b - a) * (k / 100.0)).translation();
      length += (p - prev).norm();
      prev = p;
    }
    const int n = std::max(1, static_cast<int>(std::ceil(length / (model.demo_speed * dt))));
    for (int k = 1; k <= n; ++k) {
      const mechanism::JointVector q = a + (b - a) * (static_cast<double>(k) / n);
      push(mechanism::forward_kinematics(model, q), closed);
    }
  }
  return demo;
}

}  // namespace mlfd::demo
