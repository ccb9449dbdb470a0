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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "mlfd/common/error.hpp"
#include "mlfd/common/random.hpp"
#include "mlfd/demo/dataset.hpp"
#include "mlfd/mechanism/kinematics.hpp"
#include "mlfd/mechanism/loader.hpp"
#include "mlfd/perception/grasp.hpp"
#include "mlfd/perception/scene.hpp"

using namespace mlfd;
using namespace mlfd::perception;
using geometry::CameraModel;
using geometry::deg_to_rad;
using geometry::rad_to_deg;

namespace {

namespace fs = std::filesystem;

const CameraModel kCam = CameraModel::standard();

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mlfd_perception_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct LockView {
  mechanism::MechanismModel model;
  Pose handle;
  Scene scene;
  HueModel hue;
};

LockView lock_view(const std::string& name = "lock1") {
  LockView v;
  v.model = mechanism::bundled_mechanism(name);
  v.handle = mechanism::forward_kinematics(v.model, mechanism::JointVector::Zero(v.model.joints.size()));
  v.scene = scene_for_mechanism(v.model, v.handle);
  const demo::DemoTrajectory d = demo::scripted_demo(v.model, {});
  v.hue = demo::fit_hue_from_demo(d, v.scene, kCam, v.model.appearance.object_width);
  return v;
}

// Tool pose h above the grasp frame, offset laterally and yawed.
Pose view_from(const Pose& grasp, double h, double dx = 0.0, double dy = 0.0, double yaw = 0.0) {
  return grasp * Pose::from_yaw(yaw, Vec3(dx, dy, -h));
}

geometry::Vec2 projected_center(const Pose& ee, const Pose& grasp) {
  const Vec3 p = kCam.camera_pose(ee).inverse() * grasp.translation();
  return geometry::project_point(kCam, p);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

struct Estimators {
  YawEstimator augmented;
  YawEstimator demo_only;
};

const Estimators& lock1_estimators() {
  static const Estimators e = [] {
    const LockView v = lock_view();
    const demo::DemoTrajectory d = demo::scripted_demo(v.model, {});
    const Pose g = d.grasp_pose();
    const double w = v.model.appearance.object_width;
    Estimators out;
    out.augmented = demo::fit_yaw_estimator(demo::generate_grasp_labels(
        demo::generate_funnel_poses(g, demo::FunnelPlan::standard()), g, kCam, w, v.scene));
    out.demo_only = demo::fit_yaw_estimator(
        demo::generate_grasp_labels(demo::approach_poses(d, 50), g, kCam, w, v.scene));
    return out;
  }();
  return e;
}

}  // namespace

TEST_CASE("hsv conversion examples") {
  CHECK(to_hsv({255, 0, 0}).h == doctest::Approx(0.0));
  CHECK(to_hsv({0, 255, 0}).h == doctest::Approx(120.0));
  CHECK(to_hsv({0, 0, 255}).h == doctest::Approx(240.0));
  CHECK(to_hsv({255, 0, 255}).h == doctest::Approx(300.0));
  const Hsv grey = to_hsv({100, 100, 100});
  CHECK(grey.s == 0.0);
  CHECK(grey.v == doctest::Approx(100.0 / 255.0));
}

TEST_CASE("empty scene renders uniform background at far depth") {
  Scene s;
  s.table = false;
  const Image img = render(s, kCam, Pose::identity());
  CHECK(img.width == kCam.width);
  CHECK(img.height == kCam.height);
  CHECK(std::all_of(img.pixels.begin(), img.pixels.end(), [&](const Rgb& c) { return c == s.background; }));
  CHECK(std::all_of(img.depth.begin(), img.depth.end(), [](float d) { return d == kFarDepth; }));
}

TEST_CASE("sphere on the optical axis projects to the principal point") {
  Scene s;
  s.table = false;
  Primitive sphere;
  sphere.kind = Primitive::Kind::kSphere;
  sphere.radius = 0.02;
  sphere.pose = Pose::from_translation(Vec3(0, 0, 0.42));
  sphere.color = {40, 200, 40};
  s.primitives.push_back(sphere);
  const Image img = render(s, kCam, Pose::identity());
  double su = 0.0;
  double sv = 0.0;
  int n = 0;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      if (img.at(u, v) == sphere.color) {
        su += u + 0.5;
        sv += v + 0.5;
        ++n;
      }
    }
  }
  REQUIRE(n > 0);
  CHECK(su / n == doctest::Approx(kCam.u0).epsilon(0.003));
  CHECK(sv / n == doctest::Approx(kCam.v0).epsilon(0.003));
  // Silhouette radius of a sphere at distance D: f * r / sqrt(D^2 - r^2).
  const double r_px = kCam.fx * 0.02 / std::sqrt(0.42 * 0.42 - 0.02 * 0.02);
  CHECK(n == doctest::Approx(M_PI * r_px * r_px).epsilon(0.05));
  CHECK(img.depth_at(160, 120) == doctest::Approx(0.4).epsilon(1e-3));
}

TEST_CASE("nearer primitive wins each pixel") {
  Scene s;
  s.table = false;
  Primitive far;
  far.pose = Pose::from_translation(Vec3(0, 0, 1.0));
  far.half_extents = Vec3(0.2, 0.2, 0.01);
  far.color = {200, 0, 0};
  Primitive near = far;
  near.pose = Pose::from_translation(Vec3(0, 0, 0.5));
  near.half_extents = Vec3(0.02, 0.02, 0.01);
  near.color = {0, 0, 200};
  s.primitives = {near, far};
  const Image a = render(s, kCam, Pose::identity());
  s.primitives = {far, near};
  const Image b = render(s, kCam, Pose::identity());
  CHECK(a.pixels == b.pixels);
  CHECK(a.at(160, 120) == near.color);
  CHECK(a.depth_at(160, 120) == doctest::Approx(0.49).epsilon(1e-4));
  CHECK(a.at(160 + 40, 120) == far.color);
}

TEST_CASE("rendering is deterministic") {
  LockView v = lock_view();
  Rng rng(11);
  add_distractors(v.scene, v.model, rng, 6);
  const Pose cam_pose = kCam.camera_pose(view_from(v.handle, 0.3, 0.03, -0.02, 0.4));
  const Image a = render(v.scene, kCam, cam_pose);
  const Image b = render(v.scene, kCam, cam_pose);
  CHECK(a.pixels == b.pixels);
  CHECK(a.depth == b.depth);
}

TEST_CASE("png round trip keeps color exactly and depth to the millimeter") {
  const LockView v = lock_view();
  const Image img = render(v.scene, kCam, kCam.camera_pose(view_from(v.handle, 0.25)));
  const fs::path dir = temp_dir("png");
  write_png((dir / "a.png").string(), img);
  write_depth_png((dir / "a_depth.png").string(), img);
  Image back = read_png((dir / "a.png").string());
  CHECK(back.pixels == img.pixels);
  read_depth_png((dir / "a_depth.png").string(), back);
  REQUIRE(back.depth.size() == img.depth.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    worst = std::max(worst, static_cast<double>(std::abs(back.depth[i] - img.depth[i])));
  }
  CHECK(worst <= 0.0005 + 1e-6);
  CHECK_THROWS_AS(read_png((dir / "missing.png").string()), Error);
  std::ofstream(dir / "junk.png") << "not a png";
  CHECK_THROWS_AS(read_png((dir / "junk.png").string()), Error);
}

TEST_CASE("hue model fitted from the demonstration view") {
  const LockView v = lock_view();
  CHECK(v.hue.hue_deg == doctest::Approx(120.0).epsilon(0.01));
  const double w = v.model.appearance.object_width;
  // Plate minus the dark marking strip.
  CHECK(v.hue.area_m2 == doctest::Approx(w * w * (1.0 - 0.3 * 0.2)).epsilon(0.05));
}

TEST_CASE("detection centered on the projected handle") {
  const LockView v = lock_view();
  for (double h : {0.15, 0.25, 0.35}) {
    const Pose ee = view_from(v.handle, h);
    const Detection det = detect_target(render(v.scene, kCam, kCam.camera_pose(ee)), v.hue, kCam);
    REQUIRE_FALSE(det.none);
    const geometry::Vec2 c = projected_center(ee, v.handle);
    CHECK((det.box.center() - c).norm() < 2.0);
    CHECK(det.score > 0.9);
    CHECK(det.score <= 1.0);
  }
}

TEST_CASE("scene without the target yields no detection") {
  LockView v = lock_view();
  Scene clutter;
  Rng rng(5);
  add_distractors(clutter, v.model, rng, 8);
  const Detection det = detect_target(render(clutter, kCam, kCam.camera_pose(view_from(v.handle, 0.35))),
                                      v.hue, kCam);
  CHECK(det.none);
  CHECK_THROWS_AS(estimate_grasp_pose(det, Image(), kCam, YawEstimator()), Error);
}

TEST_CASE("distractors leave the detection unchanged") {
  const LockView v = lock_view();
  const Pose ee = view_from(v.handle, 0.35, 0.02, 0.01, 0.3);
  const Detection clean = detect_target(render(v.scene, kCam, kCam.camera_pose(ee)), v.hue, kCam);
  REQUIRE_FALSE(clean.none);
  for (int layout = 0; layout < 50; ++layout) {
    Scene s = v.scene;
    Rng rng(1000 + static_cast<std::uint64_t>(layout));
    add_distractors(s, v.model, rng, 6);
    const Detection det = detect_target(render(s, kCam, kCam.camera_pose(ee)), v.hue, kCam);
    REQUIRE_FALSE(det.none);
    CHECK((det.box.center() - clean.box.center()).norm() < 2.0);
  }
}

TEST_CASE("detection is translation equivariant") {
  const LockView v = lock_view();
  const Pose ee = view_from(v.handle, 0.3);
  const Pose cam_pose = kCam.camera_pose(ee);
  const Detection base = detect_target(render(v.scene, kCam, cam_pose), v.hue, kCam);
  REQUIRE_FALSE(base.none);
  const double depth = base.median_depth;
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const geometry::Vec2 shift_px(std::round(rng.uniform(-40, 40)), std::round(rng.uniform(-30, 30)));
    // Camera axes are parallel to the world's up to the tool flip.
    const Vec3 shift_cam(shift_px.x() * depth / kCam.fx, shift_px.y() * depth / kCam.fy, 0.0);
    const Vec3 shift_world = cam_pose.rotate(shift_cam);
    mechanism::MechanismModel moved = v.model;
    moved.base_pose = Pose::from_translation(shift_world) * moved.base_pose;
    const Scene s = scene_for_mechanism(moved, Pose::from_translation(shift_world) * v.handle);
    const Detection det = detect_target(render(s, kCam, cam_pose), v.hue, kCam);
    REQUIRE_FALSE(det.none);
    CHECK((det.box.center() - base.box.center() - shift_px).norm() <= 1.0);
  }
}

TEST_CASE("grasp position back-projected within 3 mm") {
  const LockView v = lock_view();
  const YawEstimator& yaw = lock1_estimators().augmented;
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const Pose ee = view_from(v.handle, rng.uniform(0.15, 0.35), rng.uniform(-0.05, 0.05),
                              rng.uniform(-0.05, 0.05), rng.uniform(-1.2, 1.2));
    const Image img = render(v.scene, kCam, kCam.camera_pose(ee));
    const Detection det = detect_target(img, v.hue, kCam);
    REQUIRE_FALSE(det.none);
    const GraspEstimate est = estimate_grasp_pose(det, img, kCam, yaw);
    const Vec3 truth = kCam.camera_pose(ee).inverse() * v.handle.translation();
    CHECK((est.position - truth).norm() < 0.003);
    CHECK(est.confidence >= 0.0);
    CHECK(est.confidence <= 1.0);
    CHECK(geometry::translation_distance(grasp_pose_in_world(est, ee, kCam), v.handle) < 0.003);
  }
}

TEST_CASE("yaw estimator is exact on training members") {
  Rng rng(2);
  std::vector<YawSample> samples;
  for (int i = 0; i < 40; ++i) {
    YawSample s;
    s.features.resize(16);
    double n = 0.0;
    for (float& f : s.features) {
      f = static_cast<float>(rng.normal());
      n += f * f;
    }
    for (float& f : s.features) f = static_cast<float>(f / std::sqrt(n));
    s.yaw = rng.uniform(-M_PI, M_PI);
    samples.push_back(s);
  }
  const YawEstimator est(samples);
  for (const YawSample& s : samples) {
    const YawPrediction p = est.predict(s.features);
    CHECK(p.yaw == doctest::Approx(s.yaw));
    CHECK(p.agreement == 1.0);
  }
  CHECK_THROWS_AS(YawEstimator(std::vector<YawSample>{}), Error);
  try {
    YawEstimator(std::vector<YawSample>{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyDataset);
  }
  CHECK_THROWS_AS(est.predict(std::vector<float>(3)), Error);
}

TEST_CASE("estimator files round trip") {
  const YawEstimator& yaw = lock1_estimators().augmented;
  const fs::path dir = temp_dir("index");
  TargetEstimator target{lock_view().hue, yaw};
  target.save((dir / "est.idx").string());
  const TargetEstimator back = TargetEstimator::load((dir / "est.idx").string());
  CHECK(back.hue.hue_deg == target.hue.hue_deg);
  CHECK(back.hue.area_m2 == target.hue.area_m2);
  CHECK(back.yaw.size() == yaw.size());
  Rng rng(4);
  std::vector<float> q(kCropSize * kCropSize);
  for (float& f : q) f = static_cast<float>(rng.normal() / kCropSize);
  CHECK(back.yaw.predict(q).yaw == yaw.predict(q).yaw);
  std::ofstream(dir / "junk.idx") << "garbage";
  CHECK_THROWS_AS(TargetEstimator::load((dir / "junk.idx").string()), Error);
  CHECK_THROWS_AS(YawEstimator::load((dir / "missing.idx").string()), Error);
}

TEST_CASE("augmented estimator generalizes to held-out rotations") {
  const LockView v = lock_view();
  const Estimators& e = lock1_estimators();
  Rng rng(23);
  std::vector<double> aug;
  std::vector<double> only;
  for (int i = 0; i < 60; ++i) {
    const double yaw = rng.uniform(-M_PI, M_PI);
    const Pose ee = view_from(v.handle, rng.uniform(0.15, 0.35), rng.uniform(-0.06, 0.06),
                              rng.uniform(-0.06, 0.06), yaw);
    const Image img = render(v.scene, kCam, kCam.camera_pose(ee));
    const Detection det = detect_target(img, v.hue, kCam);
    REQUIRE_FALSE(det.none);
    const double truth = geometry::yaw_of_grasp(geometry::relative_pose(ee, v.handle));
    CHECK(truth == doctest::Approx(-yaw));
    aug.push_back(std::abs(geometry::wrap_angle(estimate_grasp_pose(det, img, kCam, e.augmented).yaw - truth)));
    if (std::abs(yaw) > deg_to_rad(30.0)) {
      only.push_back(std::abs(geometry::wrap_angle(estimate_grasp_pose(det, img, kCam, e.demo_only).yaw - truth)));
    }
  }
  CHECK(rad_to_deg(median(aug)) < 5.0);
  CHECK(rad_to_deg(median(only)) > 30.0);
}

TEST_CASE("object rotated 45 degrees") {
  LockView v = lock_view();
  const Estimators& e = lock1_estimators();
  const Pose above = view_from(v.handle, 0.3);
  v.model.base_pose = Pose::from_yaw(deg_to_rad(45.0), v.model.base_pose.translation());
  const Pose handle = mechanism::forward_kinematics(v.model, mechanism::JointVector::Zero(3));
  const Image img = render(scene_for_mechanism(v.model, handle), kCam, kCam.camera_pose(above));
  const Detection det = detect_target(img, v.hue, kCam);
  REQUIRE_FALSE(det.none);
  const double truth = geometry::yaw_of_grasp(geometry::relative_pose(above, handle));
  CHECK(std::abs(rad_to_deg(truth)) == doctest::Approx(45.0).epsilon(1e-6));
  CHECK(rad_to_deg(std::abs(geometry::wrap_angle(estimate_grasp_pose(det, img, kCam, e.augmented).yaw - truth))) < 5.0);
  CHECK(rad_to_deg(std::abs(geometry::wrap_angle(estimate_grasp_pose(det, img, kCam, e.demo_only).yaw - truth))) > 30.0);
}

TEST_CASE("spiral waypoints") {
  const Pose start = Pose::from_yaw(0.3, Vec3(0.5, 0.0, 0.45));
  const auto w = spiral_waypoints(start, {32, 0.15});
  REQUIRE(w.size() == 32);
  const double s = 0.15;
  const std::vector<std::pair<int, int>> expect{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {2, -1}};
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const Vec3 d = w[i].translation() - start.translation();
    CHECK(d.x() == doctest::Approx(expect[i].first * s));
    CHECK(d.y() == doctest::Approx(expect[i].second * s));
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i].translation().z() == doctest::Approx(start.translation().z()));
    CHECK(geometry::rotation_distance(w[i], start) < 1e-9);
    for (std::size_t j = 0; j < i; ++j) CHECK((w[i].translation() - w[j].translation()).norm() > 0.1);
  }
}

TEST_CASE("search behavior") {
  const LockView v = lock_view();
  auto visible_in = [&](const Scene& s) {
    return [&, s](const Pose& ee) {
      return !detect_target(render(s, kCam, kCam.camera_pose(ee)), v.hue, kCam).none;
    };
  };
  const Pose above = view_from(v.handle, 0.35);
  CHECK(search_behavior(above, visible_in(v.scene)).empty());

  // Start 0.35 m to the side: the target is out of the first view.
  const Pose aside = Pose::from_translation(Vec3(0.35, 0.1, 0)) * above;
  REQUIRE_FALSE(visible_in(v.scene)(aside));
  const auto path = search_behavior(aside, visible_in(v.scene));
  CHECK(!path.empty());
  CHECK(path.size() <= 32);
  CHECK(visible_in(v.scene)(path.back()));

  Scene empty;
  try {
    search_behavior(above, visible_in(empty));
    FAIL("expected SearchExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSearchExhausted);
  }
}
