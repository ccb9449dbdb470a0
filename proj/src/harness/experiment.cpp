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

#include "mlfd/harness/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "mlfd/common/error.hpp"
#include "mlfd/control/pbvs.hpp"
#include "mlfd/control/sequencer.hpp"
#include "mlfd/demo/dataset.hpp"
#include "mlfd/demo/segmentation.hpp"
#include "mlfd/mechanism/kinematics.hpp"
#include "mlfd/mechanism/loader.hpp"
#include "mlfd/perception/scene.hpp"

namespace mlfd::harness {

using geometry::Pose;
using geometry::Quat;
using geometry::Vec3;
using mechanism::MechanismModel;

namespace {

constexpr double kServoDt = 0.05;           // s, camera-rate control period
constexpr double kGraspTimeout = 30.0;      // s of servoing, search excluded
constexpr double kSearchSpeed = 0.1;        // m/s between scan waypoints
constexpr int kMaxMissedFrames = 5;
constexpr double kGraspPositionTol = 0.005; // m
constexpr double kGraspAngleTol = 0.13962634015954636;  // rad (8 deg)
constexpr double kLiftDistance = 0.01;      // m
constexpr double kContactStiffness = 4000;  // N/m, tool pressing into the knob
constexpr double kOutOfViewOffset = 0.3;    // m, lateral start offset, beyond the ~0.19 m half field of view

Vec3 random_unit_perpendicular(const Vec3& f, Rng& rng) {
  while (true) {
    const Vec3 r(rng.normal(), rng.normal(), rng.normal());
    const Vec3 p = r - r.dot(f) * f;
    if (p.norm() > 1e-6) return p.normalized();
  }
}

// Rotates and shifts the base about its own origin.
Pose perturb_base(const Pose& base, const PoseRandomization& r, Rng& rng) {
  const double dx = rng.uniform(-r.translation, r.translation);
  const double dy = rng.uniform(-r.translation, r.translation);
  const double yaw = rng.uniform(-r.yaw, r.yaw);
  const double tilt = rng.uniform(-r.tilt, r.tilt);
  const double tilt_dir = rng.uniform(-M_PI, M_PI);
  const Quat q_tilt(Eigen::AngleAxisd(tilt, Vec3(std::cos(tilt_dir), std::sin(tilt_dir), 0.0)));
  const Quat q_yaw(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
  return Pose(q_tilt * q_yaw * base.rotation(), base.translation() + Vec3(dx, dy, 0.0));
}

struct World {
  MechanismModel model;
  std::vector<perception::Primitive> clutter;
  bool degraded = false;
  double light = 1.0;

  Pose handle() const { return mechanism::forward_kinematics(model, model.zero_configuration()); }
  perception::Scene scene() const {
    perception::Scene s = perception::scene_for_mechanism(model, handle(), degraded);
    s.primitives.insert(s.primitives.end(), clutter.begin(), clutter.end());
    s.light = light;
    return s;
  }
};

struct GraspRun {
  bool success = false;
  std::string reason;
  double duration = 0.0;
  int search_waypoints = 0;
  Pose final_ee;
  double position_error = 0.0;
  double yaw_error = 0.0;
};

// Reaction when the tool presses down onto the knob face.
double contact_force(const Pose& ee, const Pose& handle, double width) {
  const Vec3 d = handle.inverse() * ee.translation();
  if (d.z() <= 0.0 || std::abs(d.x()) > 0.5 * width || std::abs(d.y()) > 0.5 * width) return 0.0;
  return kContactStiffness * d.z();
}

// Drives the grasped handle along the first demonstrated motion.
bool lift_check(const World& w, const FixturePrep& prep, const Pose& ee) {
  auto model = std::make_shared<const MechanismModel>(w.model);
  mechanism::Episode ep(model, model->zero_configuration());
  const geometry::Mat3 map = ee.rotation_matrix() * prep.plan.reference_grasp.rotation_matrix().transpose();
  const Vec3 dir = (map * prep.plan.steps.front().motion_dir).normalized();
  const Vec3 start = ep.state().ee_pose.translation();
  geometry::Twist cmd = geometry::Twist::Zero();
  cmd.head<3>() = 0.02 * dir;
  for (int k = 0; k < 100; ++k) ep.step(cmd);
  return (ep.state().ee_pose.translation() - start).norm() >= kLiftDistance;
}

GraspRun grasp_once(const FixturePrep& prep, const perception::TargetEstimator& est,
                    const ScenarioConfig& c, World& w, Rng& rng) {
  const geometry::CameraModel cam = geometry::CameraModel::standard();
  const double width = w.model.appearance.object_width;
  GraspRun run;

  Pose ee = prep.demo.samples.front().ee_pose;
  if (c.start_out_of_view) {
    const double phi = rng.uniform(-M_PI, M_PI);
    ee = Pose::from_translation(kOutOfViewOffset * Vec3(std::cos(phi), std::sin(phi), 0.0)) * ee;
  }
  perception::Scene scene = w.scene();
  auto detect_at = [&](const Pose& e, perception::Image* keep) {
    perception::Image img = perception::render(scene, cam, cam.camera_pose(e));
    perception::Detection det = perception::detect_target(img, est.hue, cam);
    if (keep) *keep = std::move(img);
    return det;
  };

  // A knob clipped by the image border gives a biased estimate; keep scanning.
  auto in_full_view = [&](const Pose& e) {
    const perception::Detection det = detect_at(e, nullptr);
    return !det.none && det.box.u1 > 1.0 && det.box.v1 > 1.0 && det.box.u2 < cam.width - 1.0 &&
           det.box.v2 < cam.height - 1.0;
  };
  double t = 0.0;
  if (!in_full_view(ee)) {
    try {
      const auto path = perception::search_behavior(ee, in_full_view);
      Vec3 at = ee.translation();
      for (const Pose& p : path) {
        t += (p.translation() - at).norm() / kSearchSpeed;
        at = p.translation();
      }
      run.search_waypoints = static_cast<int>(path.size());
      ee = path.back();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSearchExhausted) throw;
      run.search_waypoints = perception::SearchParams{}.max_waypoints;
      run.reason = "target not found";
      run.duration = t;
      return run;
    }
  }

  bool changed = false;
  bool have_goal = false;
  int missed = 0;
  control::ServoGoal goal;
  bool reached = false;
  const double servo_start = t;
  while (t - servo_start < kGraspTimeout) {
    perception::Image img;
    const perception::Detection det = detect_at(ee, &img);
    if (det.none) {
      if (!have_goal || ++missed > kMaxMissedFrames) {
        run.reason = "target lost";
        break;
      }
    } else {
      missed = 0;
      const perception::GraspEstimate g = perception::estimate_grasp_pose(det, img, cam, est.yaw);
      goal.grasp_pose = perception::grasp_pose_in_world(g, ee, cam);
      have_goal = true;
    }
    const control::ServoOutput out =
        control::pbvs_step(goal, ee, contact_force(ee, w.handle(), width));
    if (out.status == control::ServoStatus::kCollided) {
      run.reason = "collision";
      break;
    }
    if (out.status == control::ServoStatus::kReached) {
      reached = true;
      break;
    }
    ee = control::integrate_twist(ee, out.twist, kServoDt);
    t += kServoDt;
    if (c.pose_change.enabled && !changed &&
        geometry::translation_distance(ee, w.handle()) < c.pose_change.trigger_distance) {
      changed = true;
      PoseRandomization r{c.pose_change.translation, c.pose_change.yaw, 0.0};
      w.model.base_pose = perturb_base(w.model.base_pose, r, rng);
      scene = w.scene();
    }
  }
  run.duration = t;
  run.final_ee = ee;
  const Pose handle = w.handle();
  run.position_error = geometry::translation_distance(ee, handle);
  run.yaw_error = geometry::rotation_distance(ee, handle);
  if (!reached) {
    if (run.reason.empty()) run.reason = "grasp timeout";
    return run;
  }
  if (run.position_error > kGraspPositionTol || run.yaw_error > kGraspAngleTol) {
    run.reason = "grasp pose error";
    return run;
  }
  if (!lift_check(w, prep, ee)) {
    run.reason = "lift failed";
    return run;
  }
  run.success = true;
  return run;
}

struct OpenRun {
  bool success = false;
  std::string reason;
  double duration = 0.0;
  int switches = 0;
  bool gate_phase_failure = false;
};

OpenRun open_once(const World& w, const demo::AugmentedPlan& plan, const Pose& perceived_grasp,
                  const ScenarioConfig& c, Rng& rng) {
  auto model = std::make_shared<const MechanismModel>(w.model);
  mechanism::Episode ep(model, model->zero_configuration());
  ep.set_sensor_noise(c.wrench_noise, rng.next_u64());
  const control::SequencerSpec seq = demo::plan_to_sequencer(plan, perceived_grasp);
  control::SequencerOptions opts;
  opts.record_trace = true;
  opts.trace_stride = 5;
  const control::SequencerResult res = control::run_sequencer(seq, ep, opts);
  OpenRun run;
  run.success = res.success;
  run.reason = res.success ? "" : "open " + res.reason;
  run.duration = res.duration;
  run.switches = static_cast<int>(res.switches.size());
  if (!res.success && !model->gates.empty()) {
    // The first gate's passage: did the gated joint make it halfway through?
    const mechanism::GateSpec& g = model->gates.front();
    const auto& joint = model->joints[static_cast<std::size_t>(g.gated_joint)];
    const double through = g.block_lo + 0.5 * (std::min(g.block_hi, joint.q_max) - g.block_lo);
    double best = ep.state().q[g.gated_joint];
    for (const control::TraceFrame& f : res.trace) best = std::max(best, f.q[g.gated_joint]);
    run.gate_phase_failure = best < through;
  }
  return run;
}

World make_world(const FixturePrep& world_prep, const ScenarioConfig& c, Rng& rng) {
  World w;
  w.model = *world_prep.model;
  w.model.base_pose = perturb_base(w.model.base_pose, c.randomization, rng);
  perception::Scene clutter;
  perception::add_distractors(clutter, w.model, rng, c.distractors);
  w.clutter = clutter.primitives;
  w.degraded = c.degraded_detection;
  w.light = rng.uniform(c.light_min, c.light_max);
  return w;
}

TrialResult base_result(const ScenarioConfig& c, Task task, Method method, int trial, std::uint64_t seed) {
  TrialResult r;
  r.fixture = c.fixture;
  r.task = task;
  r.method = method;
  r.trial = trial;
  r.seed = seed;
  r.trace_ref = c.fixture + "/" + to_string(task) + "/" + to_string(method) + "/" + std::to_string(trial);
  return r;
}

}  // namespace

FixturePrep prepare_fixture(const std::string& name) {
  FixturePrep p;
  p.model = std::make_shared<const MechanismModel>(mechanism::bundled_mechanism(name));
  p.demo = demo::scripted_demo(*p.model);
  p.segments = demo::segment_trajectory(p.demo);
  mechanism::Episode ep(p.model, p.model->zero_configuration());
  p.plan = demo::augment_contact(ep, p.segments);

  const geometry::CameraModel cam = geometry::CameraModel::standard();
  const Pose grasp = p.demo.grasp_pose();
  const perception::Scene scene = perception::scene_for_mechanism(*p.model, grasp);
  const double width = p.model->appearance.object_width;
  const perception::HueModel hue = demo::fit_hue_from_demo(p.demo, scene, cam, width);
  const demo::GraspDataset funnel = demo::generate_grasp_labels(
      demo::generate_funnel_poses(grasp, demo::FunnelPlan::standard()), grasp, cam, width, scene);
  const demo::GraspDataset approach =
      demo::generate_grasp_labels(demo::approach_poses(p.demo, 50), grasp, cam, width, scene);
  p.augmented = {hue, demo::fit_yaw_estimator(funnel)};
  p.demo_only = {hue, demo::fit_yaw_estimator(approach)};
  return p;
}

std::shared_ptr<const FixturePrep> PrepCache::get(const std::string& name) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  auto prep = std::make_shared<const FixturePrep>(prepare_fixture(name));
  cache_.emplace(name, prep);
  return prep;
}

demo::AugmentedPlan demo_forces_plan(const demo::AugmentedPlan& plan, Rng& rng) {
  demo::AugmentedPlan out = plan;
  for (demo::PlanStep& s : out.steps) {
    const bool missing = rng.bernoulli(0.5);
    const Vec3 axis_seed(rng.normal(), rng.normal(), rng.normal());
    if (missing || s.force_dir.norm() == 0.0) {
      s.force_dir = Vec3::Zero();
      s.source = demo::HypothesisSource::kNone;
      continue;
    }
    const Vec3 f = s.force_dir.normalized();
    Vec3 axis = axis_seed - axis_seed.dot(f) * f;
    if (axis.norm() < 1e-6) axis = random_unit_perpendicular(f, rng);
    s.force_dir = Eigen::AngleAxisd(geometry::deg_to_rad(60.0), axis.normalized()) * f;
  }
  return out;
}

std::vector<TrialResult> run_grasp_trials(const ScenarioConfig& config, Method method, PrepCache& cache) {
  config.validate();
  std::vector<TrialResult> results;
  if (config.trials == 0) return results;
  const auto prep = cache.get(config.fixture);
  for (int i = 0; i < config.trials; ++i) {
    Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(i));
    TrialResult r = base_result(config, Task::kGrasp, method, i, config.seed);
    World w = make_world(*prep, config, rng);
    const GraspRun g = grasp_once(*prep, method == Method::kAugmented ? prep->augmented : prep->demo_only,
                                  config, w, rng);
    r.success = r.grasp_success = g.success;
    r.failure_reason = g.reason;
    r.grasp_duration = g.duration;
    r.search_waypoints = g.search_waypoints;
    r.grasp_position_error = g.position_error;
    r.grasp_yaw_error = g.yaw_error;
    results.push_back(r);
  }
  return results;
}

std::vector<TrialResult> run_open_trials(const ScenarioConfig& config, Method method, PrepCache& cache) {
  config.validate();
  std::vector<TrialResult> results;
  if (config.trials == 0) return results;
  const auto world_prep = cache.get(config.fixture);
  const auto plan_prep = cache.get(config.demo_fixture());
  for (int i = 0; i < config.trials; ++i) {
    Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(i));
    TrialResult r = base_result(config, Task::kOpen, method, i, config.seed);
    const World w = make_world(*world_prep, config, rng);
    const Pose perceived =
        w.handle() * Pose::from_yaw(rng.uniform(-config.grasp_yaw_error, config.grasp_yaw_error));
    const demo::AugmentedPlan plan =
        method == Method::kAugmented ? plan_prep->plan : demo_forces_plan(plan_prep->plan, rng);
    const OpenRun o = open_once(w, plan, perceived, config, rng);
    r.success = r.open_success = o.success;
    r.grasp_success = true;
    r.failure_reason = o.reason;
    r.open_duration = o.duration;
    r.phase_switches = o.switches;
    r.gate_phase_failure = o.gate_phase_failure;
    results.push_back(r);
  }
  return results;
}

std::vector<TrialResult> run_full_task(const ScenarioConfig& config, Method method, PrepCache& cache) {
  config.validate();
  std::vector<TrialResult> results;
  if (config.trials == 0) return results;
  const auto prep = cache.get(config.fixture);
  for (int i = 0; i < config.trials; ++i) {
    Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(i));
    TrialResult r = base_result(config, Task::kFullTask, method, i, config.seed);
    World w = make_world(*prep, config, rng);
    const bool augmented = method == Method::kAugmented;
    const GraspRun g = grasp_once(*prep, augmented ? prep->augmented : prep->demo_only, config, w, rng);
    r.grasp_success = g.success;
    r.grasp_duration = g.duration;
    r.search_waypoints = g.search_waypoints;
    r.grasp_position_error = g.position_error;
    r.grasp_yaw_error = g.yaw_error;
    if (!g.success) {
      r.failure_reason = g.reason;
      results.push_back(r);
      continue;
    }
    const demo::AugmentedPlan plan = augmented ? prep->plan : demo_forces_plan(prep->plan, rng);
    const OpenRun o = open_once(w, plan, g.final_ee, config, rng);
    r.open_success = o.success;
    r.success = o.success;
    r.failure_reason = o.reason;
    r.open_duration = o.duration;
    r.phase_switches = o.switches;
    r.gate_phase_failure = o.gate_phase_failure;
    results.push_back(r);
  }
  return results;
}

std::vector<TrialResult> run_entry(const SuiteEntry& entry, PrepCache& cache) {
  switch (entry.task) {
    case Task::kGrasp: return run_grasp_trials(entry.scenario, entry.method, cache);
    case Task::kOpen: return run_open_trials(entry.scenario, entry.method, cache);
    case Task::kFullTask: return run_full_task(entry.scenario, entry.method, cache);
  }
  return {};
}

std::vector<TrialResult> run_suite(const SuiteConfig& suite, PrepCache& cache) {
  suite.validate();
  std::vector<TrialResult> all;
  for (const SuiteEntry& e : suite.entries) {
    std::vector<TrialResult> r = run_entry(e, cache);
    all.insert(all.end(), r.begin(), r.end());
  }
  return all;
}

nlohmann::json trial_to_json(const TrialResult& r) {
  return {{"fixture", r.fixture},
          {"task", to_string(r.task)},
          {"method", to_string(r.method)},
          {"trial", r.trial},
          {"seed", r.seed},
          {"success", r.success},
          {"failure_reason", r.failure_reason},
          {"grasp_success", r.grasp_success},
          {"open_success", r.open_success},
          {"grasp_duration", r.grasp_duration},
          {"open_duration", r.open_duration},
          {"gate_phase_failure", r.gate_phase_failure},
          {"search_waypoints", r.search_waypoints},
          {"phase_switches", r.phase_switches},
          {"grasp_position_error", r.grasp_position_error},
          {"grasp_yaw_error", r.grasp_yaw_error},
          {"trace_ref", r.trace_ref}};
}

}  // namespace mlfd::harness
