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

#include "mlfd/mechanism/loader.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "mlfd/common/error.hpp"
#include "mlfd/mechanism/bundled_fixtures.hpp"

namespace mlfd::mechanism {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::kSchemaError, what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + "." + key + " is required");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where + " must be a number");
  return j.get<double>();
}

int index(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where + " must be an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_array() || (n != 0 && j.size() != n)) {
    schema_error(where + " must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Vec3 vec3(const json& j, const std::string& where) {
  const auto v = numbers(j, 3, where);
  return Vec3(v[0], v[1], v[2]);
}

std::pair<double, double> interval(const json& j, const std::string& where) {
  const auto v = numbers(j, 2, where);
  return {v[0], v[1]};
}

Pose pose_at(const json& j, const std::string& where) {
  const Vec3 t = vec3(field(j, "position", where), where + ".position");
  Quat r = Quat::Identity();
  if (j.contains("rotation")) {
    const auto q = numbers(j["rotation"], 4, where + ".rotation");
    r = Quat(q[0], q[1], q[2], q[3]);
    if (std::abs(r.norm() - 1.0) > 1e-6) {
      throw Error(ErrorCode::kInvariantViolation, where + ".rotation is not a unit quaternion");
    }
  }
  return Pose(r, t);
}

std::array<int, 3> rgb(const json& j, const std::string& where) {
  const auto v = numbers(j, 3, where);
  std::array<int, 3> out{};
  for (int i = 0; i < 3; ++i) {
    if (v[i] < 0 || v[i] > 255) schema_error(where + " channel out of [0, 255]");
    out[i] = static_cast<int>(v[i]);
  }
  return out;
}

json vec_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

Pose pose_from_json(const json& j) { return pose_at(j, "pose"); }

json pose_to_json(const Pose& pose) {
  const Quat& q = pose.rotation();
  return {{"position", {pose.translation().x(), pose.translation().y(), pose.translation().z()}},
          {"rotation", {q.w(), q.x(), q.y(), q.z()}}};
}

MechanismModel load_mechanism_json(const json& doc) {
  if (!doc.is_object()) schema_error("mechanism document must be an object");
  MechanismModel m;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) schema_error("name must be a string");
    m.name = doc["name"].get<std::string>();
  }
  m.base_pose = pose_at(field(doc, "base_pose", "document"), "base_pose");

  const json& joints = field(doc, "joints", "document");
  if (!joints.is_array() || joints.empty()) schema_error("joints must be a non-empty array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string where = "joints[" + std::to_string(i) + "]";
    const json& jj = joints[i];
    JointSpec spec;
    spec.name = jj.value("name", "joint" + std::to_string(i));
    const json& kind = field(jj, "kind", where);
    if (kind == "prismatic") {
      spec.kind = JointKind::kPrismatic;
    } else if (kind == "revolute") {
      spec.kind = JointKind::kRevolute;
      spec.pivot = vec3(field(jj, "pivot", where), where + ".pivot");
    } else {
      schema_error(where + ".kind must be 'prismatic' or 'revolute'");
    }
    spec.axis = vec3(field(jj, "axis", where), where + ".axis");
    std::tie(spec.q_min, spec.q_max) = interval(field(jj, "range", where), where + ".range");
    m.joints.push_back(spec);
  }

  if (doc.contains("gates")) {
    const json& gates = doc["gates"];
    if (!gates.is_array()) schema_error("gates must be an array");
    for (std::size_t i = 0; i < gates.size(); ++i) {
      const std::string where = "gates[" + std::to_string(i) + "]";
      const json& gj = gates[i];
      GateSpec g;
      g.gated_joint = index(field(gj, "gated_joint", where), where + ".gated_joint");
      std::tie(g.block_lo, g.block_hi) =
          interval(field(gj, "blocking_interval", where), where + ".blocking_interval");
      g.enabling_joint = index(field(gj, "enabling_joint", where), where + ".enabling_joint");
      std::tie(g.enable_lo, g.enable_hi) =
          interval(field(gj, "enabling_interval", where), where + ".enabling_interval");
      m.gates.push_back(g);
    }
  }

  m.handle_offset = pose_at(field(doc, "handle_offset", "document"), "handle_offset");

  const json& goal = field(doc, "goal", "document");
  if (!goal.is_array()) schema_error("goal must be an array");
  for (std::size_t i = 0; i < goal.size(); ++i) {
    const std::string where = "goal[" + std::to_string(i) + "]";
    GoalInterval g;
    g.joint = index(field(goal[i], "joint", where), where + ".joint");
    std::tie(g.lo, g.hi) = interval(field(goal[i], "interval", where), where + ".interval");
    m.goal.push_back(g);
  }

  if (doc.contains("reaction_stiffness")) {
    m.reaction_stiffness = number(doc["reaction_stiffness"], "reaction_stiffness");
  }
  if (doc.contains("rotation_weight")) {
    m.rotation_weight = number(doc["rotation_weight"], "rotation_weight");
  }
  if (doc.contains("gate_entry_speed")) {
    m.gate_entry_speed = number(doc["gate_entry_speed"], "gate_entry_speed");
  }
  if (doc.contains("sketch_plane")) {
    const json& sp = doc["sketch_plane"];
    if (sp != "xz" && sp != "xy" && sp != "yz") schema_error("sketch_plane must be xy, xz or yz");
    m.sketch_plane = sp.get<std::string>();
  }
  if (doc.contains("appearance")) {
    const json& a = doc["appearance"];
    if (!a.is_object()) schema_error("appearance must be an object");
    Appearance& ap = m.appearance;
    if (a.contains("object_width")) ap.object_width = number(a["object_width"], "object_width");
    if (a.contains("knob_thickness")) {
      ap.knob_thickness = number(a["knob_thickness"], "knob_thickness");
    }
    if (a.contains("target_rgb")) ap.target_rgb = rgb(a["target_rgb"], "target_rgb");
    if (a.contains("marking_rgb")) ap.marking_rgb = rgb(a["marking_rgb"], "marking_rgb");
    if (a.contains("degraded_target_rgb")) {
      ap.degraded_target_rgb = rgb(a["degraded_target_rgb"], "degraded_target_rgb");
    }
    if (a.contains("body_rgb")) ap.body_rgb = rgb(a["body_rgb"], "body_rgb");
    if (a.contains("body_half_extents")) {
      ap.body_half_extents = vec3(a["body_half_extents"], "body_half_extents");
    }
    if (a.contains("body_gap")) ap.body_gap = number(a["body_gap"], "body_gap");
    if (ap.object_width <= 0.0) {
      throw Error(ErrorCode::kInvariantViolation, "object_width must be positive");
    }
  }
  if (doc.contains("demonstration")) {
    const json& d = doc["demonstration"];
    if (d.contains("speed")) m.demo_speed = number(d["speed"], "demonstration.speed");
    const json& wps = field(d, "waypoints", "demonstration");
    if (!wps.is_array()) schema_error("demonstration.waypoints must be an array");
    for (std::size_t i = 0; i < wps.size(); ++i) {
      const auto v = numbers(wps[i], m.joints.size(), "demonstration.waypoints");
      m.demo_waypoints.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                                   static_cast<Eigen::Index>(v.size())));
    }
    if (m.demo_speed <= 0.0) {
      throw Error(ErrorCode::kInvariantViolation, "demonstration speed must be positive");
    }
  }
  m.validate();
  return m;
}

MechanismModel load_mechanism(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    schema_error(std::string("malformed mechanism document: ") + e.what());
  }
  return load_mechanism_json(doc);
}

MechanismModel load_mechanism_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_mechanism(ss.str());
}

json mechanism_to_json(const MechanismModel& m) {
  json doc;
  doc["name"] = m.name;
  doc["base_pose"] = pose_to_json(m.base_pose);
  doc["joints"] = json::array();
  for (const JointSpec& j : m.joints) {
    json jj = {{"name", j.name},
               {"kind", to_string(j.kind)},
               {"axis", {j.axis.x(), j.axis.y(), j.axis.z()}},
               {"range", {j.q_min, j.q_max}}};
    if (j.kind == JointKind::kRevolute) jj["pivot"] = {j.pivot.x(), j.pivot.y(), j.pivot.z()};
    doc["joints"].push_back(jj);
  }
  doc["gates"] = json::array();
  for (const GateSpec& g : m.gates) {
    doc["gates"].push_back({{"gated_joint", g.gated_joint},
                            {"blocking_interval", {g.block_lo, g.block_hi}},
                            {"enabling_joint", g.enabling_joint},
                            {"enabling_interval", {g.enable_lo, g.enable_hi}}});
  }
  doc["handle_offset"] = pose_to_json(m.handle_offset);
  doc["goal"] = json::array();
  for (const GoalInterval& g : m.goal) {
    doc["goal"].push_back({{"joint", g.joint}, {"interval", {g.lo, g.hi}}});
  }
  doc["reaction_stiffness"] = m.reaction_stiffness;
  doc["rotation_weight"] = m.rotation_weight;
  doc["gate_entry_speed"] = m.gate_entry_speed;
  doc["sketch_plane"] = m.sketch_plane;
  const Appearance& a = m.appearance;
  doc["appearance"] = {
      {"object_width", a.object_width},
      {"knob_thickness", a.knob_thickness},
      {"target_rgb", a.target_rgb},
      {"marking_rgb", a.marking_rgb},
      {"degraded_target_rgb", a.degraded_target_rgb},
      {"body_rgb", a.body_rgb},
      {"body_half_extents", {a.body_half_extents.x(), a.body_half_extents.y(), a.body_half_extents.z()}},
      {"body_gap", a.body_gap}};
  if (!m.demo_waypoints.empty()) {
    json wps = json::array();
    for (const JointVector& w : m.demo_waypoints) wps.push_back(vec_json(w));
    doc["demonstration"] = {{"speed", m.demo_speed}, {"waypoints", wps}};
  }
  return doc;
}

std::vector<std::string> bundled_mechanism_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::bundled_fixtures()) names.emplace_back(name);
  return names;
}

std::string bundled_mechanism_document(const std::string& name) {
  for (const auto& [fixture, text] : detail::bundled_fixtures()) {
    if (fixture == name) return std::string(text);
  }
  throw Error(ErrorCode::kNotFound, "unknown mechanism '" + name + "'");
}

MechanismModel bundled_mechanism(const std::string& name) {
  return load_mechanism(bundled_mechanism_document(name));
}

}  // namespace mlfd::mechanism
