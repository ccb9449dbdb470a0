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

#include "mlfd/demo/serialize.hpp"

#include <fstream>

#include "mlfd/common/error.hpp"
#include "mlfd/mechanism/loader.hpp"

namespace mlfd::demo {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& msg) { throw Error(ErrorCode::kSchemaError, msg); }

json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema_error(where + ": missing '" + key + "'");
  return j.at(key);
}

Vec3 vec_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) schema_error(where + ": expected 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) schema_error(where + ": expected 3 numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

std::string string_from(const json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where + ": expected a string");
  return j.get<std::string>();
}

double number_from(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where + ": expected a number");
  return j.get<double>();
}

}  // namespace

HypothesisSource hypothesis_source_from_string(const std::string& s) {
  for (HypothesisSource h : {HypothesisSource::kNextMotion, HypothesisSource::kPreviousMotion,
                             HypothesisSource::kGravity, HypothesisSource::kNone}) {
    if (s == to_string(h)) return h;
  }
  schema_error("unknown hypothesis source '" + s + "'");
}

Verdict verdict_from_string(const std::string& s) {
  for (Verdict v : {Verdict::kValid, Verdict::kMoved, Verdict::kSkipped}) {
    if (s == to_string(v)) return v;
  }
  schema_error("unknown verdict '" + s + "'");
}

json segment_to_json(const Segment& s) {
  return {{"index", s.index},
          {"start", vec_json(s.start)},
          {"end", vec_json(s.end)},
          {"direction", vec_json(s.direction)},
          {"first_sample", s.first_sample},
          {"last_sample", s.last_sample}};
}

json segmentation_summary(const std::vector<Segment>& segments) {
  json list = json::array();
  for (const Segment& s : segments) list.push_back(segment_to_json(s));
  return {{"k", segments.size()}, {"segments", list}};
}

json hypothesis_result_to_json(const ForceHypothesisResult& r) {
  return {{"segment", r.segment},
          {"source", to_string(r.candidate.source)},
          {"direction", vec_json(r.candidate.direction)},
          {"displacement", r.displacement},
          {"verdict", to_string(r.verdict)}};
}

json plan_to_json(const AugmentedPlan& plan) {
  json steps = json::array();
  for (const PlanStep& s : plan.steps) {
    json evals = json::array();
    for (const ForceHypothesisResult& r : s.evaluations) evals.push_back(hypothesis_result_to_json(r));
    json q = json::array();
    for (Eigen::Index i = 0; i < s.q_eval.size(); ++i) q.push_back(s.q_eval[i]);
    steps.push_back({{"motion_dir", vec_json(s.motion_dir)},
                     {"force_dir", vec_json(s.force_dir)},
                     {"source", to_string(s.source)},
                     {"start", vec_json(s.start)},
                     {"q_eval", q},
                     {"evaluations", evals}});
  }
  return {{"reference_grasp", mechanism::pose_to_json(plan.reference_grasp)},
          {"steps", steps},
          {"warnings", plan.warnings}};
}

AugmentedPlan plan_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("plan must be an object");
  AugmentedPlan plan;
  try {
    plan.reference_grasp = mechanism::pose_from_json(field(doc, "reference_grasp", "plan"));
  } catch (const Error& e) {
    schema_error(std::string("plan.reference_grasp: ") + e.what());
  }
  const json& steps = field(doc, "steps", "plan");
  if (!steps.is_array() || steps.empty()) schema_error("plan.steps must be a non-empty array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string where = "plan.steps[" + std::to_string(i) + "]";
    const json& js = steps[i];
    PlanStep s;
    s.motion_dir = vec_from(field(js, "motion_dir", where), where + ".motion_dir");
    if (std::abs(s.motion_dir.norm() - 1.0) > 1e-6) schema_error(where + ".motion_dir must be unit");
    s.force_dir = vec_from(field(js, "force_dir", where), where + ".force_dir");
    s.source = hypothesis_source_from_string(string_from(field(js, "source", where), where + ".source"));
    if (js.contains("start")) s.start = vec_from(js["start"], where + ".start");
    if (js.contains("q_eval")) {
      const json& q = js["q_eval"];
      if (!q.is_array()) schema_error(where + ".q_eval must be an array");
      s.q_eval.resize(static_cast<Eigen::Index>(q.size()));
      for (std::size_t k = 0; k < q.size(); ++k) {
        s.q_eval[static_cast<Eigen::Index>(k)] = number_from(q[k], where + ".q_eval");
      }
    }
    if (js.contains("evaluations")) {
      for (const json& je : js["evaluations"]) {
        ForceHypothesisResult r;
        r.segment = static_cast<int>(number_from(field(je, "segment", where), where + ".segment"));
        r.candidate.source =
            hypothesis_source_from_string(string_from(field(je, "source", where), where + ".source"));
        r.candidate.direction = vec_from(field(je, "direction", where), where + ".direction");
        r.displacement = number_from(field(je, "displacement", where), where + ".displacement");
        r.verdict = verdict_from_string(string_from(field(je, "verdict", where), where + ".verdict"));
        s.evaluations.push_back(r);
      }
    }
    plan.steps.push_back(std::move(s));
  }
  if (doc.contains("warnings")) {
    for (const json& w : doc["warnings"]) plan.warnings.push_back(string_from(w, "plan.warnings"));
  }
  return plan;
}

AugmentedPlan load_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    schema_error(path + ": " + e.what());
  }
  return plan_from_json(doc);
}

}  // namespace mlfd::demo
