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

#include "mlfd/demo/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "mlfd/common/error.hpp"
#include "mlfd/mechanism/loader.hpp"

namespace mlfd::demo {

namespace fs = std::filesystem;
using nlohmann::json;

void FunnelPlan::validate() const {
  if (rings.empty()) throw Error(ErrorCode::kInvalidArgument, "funnel plan has no rings");
  if (yaw_offsets.empty()) throw Error(ErrorCode::kInvalidArgument, "funnel plan has no yaw offsets");
  for (const FunnelRing& r : rings) {
    if (!(r.radius >= 0.0) || !(r.height > 0.0) || r.positions < 1) {
      throw Error(ErrorCode::kInvalidArgument, "funnel ring needs radius >= 0, height > 0, positions >= 1");
    }
  }
}

std::size_t FunnelPlan::size() const {
  std::size_t n = 0;
  for (const FunnelRing& r : rings) n += static_cast<std::size_t>(r.positions);
  return n * yaw_offsets.size();
}

FunnelPlan FunnelPlan::standard() {
  FunnelPlan plan;
  constexpr int kRings = 5;
  for (int i = 0; i < kRings; ++i) {
    const double s = static_cast<double>(i) / (kRings - 1);
    plan.rings.push_back({0.12 + s * (0.02 - 0.12), 0.35 + s * (0.15 - 0.35), 25});
  }
  // Full turn: the marking strip makes every knob yaw distinguishable.
  constexpr int kYaws = 36;
  for (int k = 0; k < kYaws; ++k) {
    plan.yaw_offsets.push_back(geometry::deg_to_rad(-180.0 + 360.0 * k / kYaws));
  }
  return plan;
}

std::vector<Pose> generate_funnel_poses(const Pose& grasp_pose, const FunnelPlan& plan) {
  plan.validate();
  std::vector<Pose> poses;
  poses.reserve(plan.size());
  for (const FunnelRing& ring : plan.rings) {
    for (int j = 0; j < ring.positions; ++j) {
      const double beta = 2.0 * M_PI * j / ring.positions;
      // Grasp +z points into the object, so "above" is -z.
      const Vec3 offset(ring.radius * std::cos(beta), ring.radius * std::sin(beta), -ring.height);
      for (double yaw : plan.yaw_offsets) {
        poses.push_back(grasp_pose * Pose::from_yaw(yaw, offset));
      }
    }
  }
  return poses;
}

std::vector<Pose> approach_poses(const DemoTrajectory& demo, int count) {
  demo.validate();
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "approach pose count must be positive");
  const std::size_t g = demo.resolved_grasp_index();
  std::vector<Pose> out;
  for (int i = 0; i < count; ++i) {
    const double s = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
    out.push_back(demo.samples[static_cast<std::size_t>(std::lround(s * static_cast<double>(g)))].ee_pose);
  }
  return out;
}

GraspDataset generate_grasp_labels(const std::vector<Pose>& poses, const Pose& grasp_pose,
                                   const geometry::CameraModel& cam, double object_width,
                                   const perception::Scene& scene, const LabelOptions& options) {
  GraspDataset ds;
  std::ofstream index;
  if (options.out_dir) {
    fs::create_directories(fs::path(*options.out_dir) / "images");
    index.open(fs::path(*options.out_dir) / "index.jsonl");
    if (!index) throw Error(ErrorCode::kIoError, "cannot write the dataset index in " + *options.out_dir);
  }
  for (const Pose& ee : poses) {
    geometry::SquareProjection proj;
    try {
      proj = geometry::grasp_square_to_bbox(cam, ee, grasp_pose, object_width);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonPositiveDepth) throw;
      ++ds.dropped;
      continue;
    }
    if (proj.out_of_view) {
      ++ds.dropped;
      continue;
    }
    const perception::Image img = perception::render(scene, cam, cam.camera_pose(ee));
    GraspRecord rec;
    rec.ee_pose = ee;
    rec.label.box = proj.box;
    rec.label.relative_pose = geometry::relative_pose(ee, grasp_pose);
    rec.label.yaw = geometry::yaw_of_grasp(rec.label.relative_pose);
    rec.features = perception::crop_features(img, proj.box);
    if (options.out_dir) {
      char name[32];
      std::snprintf(name, sizeof(name), "%05zu", ds.records.size());
      rec.image_file = std::string("images/") + name + ".png";
      const fs::path dir(*options.out_dir);
      perception::write_png((dir / rec.image_file).string(), img);
      perception::write_depth_png((dir / "images" / (std::string(name) + "_depth.png")).string(), img);
      const json line = {{"image", rec.image_file},
                         {"box", {proj.box.u1, proj.box.v1, proj.box.u2, proj.box.v2}},
                         {"yaw", rec.label.yaw},
                         {"relative_pose", mechanism::pose_to_json(rec.label.relative_pose)},
                         {"ee_pose", mechanism::pose_to_json(ee)}};
      index << line.dump() << '\n';
    }
    ds.records.push_back(std::move(rec));
  }
  if (options.out_dir) write_dataset_meta(*options.out_dir, ds);
  return ds;
}

void write_dataset_meta(const std::string& dir, const GraspDataset& dataset) {
  json meta = {{"records", dataset.records.size()}, {"dropped", dataset.dropped}};
  if (dataset.has_hue) {
    const perception::HueModel& h = dataset.hue;
    meta["hue"] = {{"hue_deg", h.hue_deg},         {"hue_tolerance_deg", h.hue_tolerance_deg},
                   {"min_saturation", h.min_saturation}, {"min_value", h.min_value},
                   {"area_m2", h.area_m2},         {"min_fraction", h.min_fraction}};
  }
  std::ofstream out(fs::path(dir) / "meta.json");
  if (!out) throw Error(ErrorCode::kIoError, "cannot write meta.json in " + dir);
  out << meta.dump(2) << '\n';
}

perception::HueModel fit_hue_from_demo(const DemoTrajectory& demo, const perception::Scene& scene,
                                       const geometry::CameraModel& cam, double object_width) {
  const Pose ee = demo.grasp_pose();
  // The grasp-time view sits on the object; back off along the approach so
  // the whole target is in frame.
  const Pose view = ee * Pose::from_translation(Vec3(0, 0, -0.15));
  const geometry::SquareProjection proj = geometry::grasp_square_to_bbox(cam, view, ee, object_width);
  const perception::Image img = perception::render(scene, cam, cam.camera_pose(view));
  return perception::fit_hue_model(img, proj.box, cam);
}

GraspDataset load_grasp_dataset(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream index(root / "index.jsonl");
  if (!index) throw Error(ErrorCode::kIoError, "no index.jsonl in " + dir);
  GraspDataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(index, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      GraspRecord rec;
      rec.image_file = j.at("image").get<std::string>();
      const auto box = j.at("box").get<std::vector<double>>();
      if (box.size() != 4) throw Error(ErrorCode::kSchemaError, "box needs 4 numbers");
      rec.label.box = {box[0], box[1], box[2], box[3]};
      rec.label.yaw = j.at("yaw").get<double>();
      rec.label.relative_pose = mechanism::pose_from_json(j.at("relative_pose"));
      rec.ee_pose = mechanism::pose_from_json(j.at("ee_pose"));
      const perception::Image img = perception::read_png((root / rec.image_file).string());
      rec.features = perception::crop_features(img, rec.label.box);
      ds.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError,
                  "index.jsonl line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::ifstream meta_in(root / "meta.json");
  if (meta_in) {
    try {
      const json meta = json::parse(meta_in);
      ds.dropped = meta.value("dropped", 0);
      if (meta.contains("hue")) {
        const json& h = meta["hue"];
        ds.hue.hue_deg = h.at("hue_deg").get<double>();
        ds.hue.hue_tolerance_deg = h.at("hue_tolerance_deg").get<double>();
        ds.hue.min_saturation = h.at("min_saturation").get<double>();
        ds.hue.min_value = h.at("min_value").get<double>();
        ds.hue.area_m2 = h.at("area_m2").get<double>();
        ds.hue.min_fraction = h.at("min_fraction").get<double>();
        ds.has_hue = true;
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError, std::string("meta.json: ") + e.what());
    }
  }
  return ds;
}

perception::YawEstimator fit_yaw_estimator(const GraspDataset& dataset) {
  if (dataset.records.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no records");
  std::vector<perception::YawSample> samples;
  samples.reserve(dataset.records.size());
  for (const GraspRecord& r : dataset.records) samples.push_back({r.features, r.label.yaw});
  return perception::YawEstimator(std::move(samples));
}

perception::TargetEstimator fit_target_estimator(const GraspDataset& dataset) {
  if (!dataset.has_hue) throw Error(ErrorCode::kConfigError, "dataset carries no detector color model");
  return {dataset.hue, fit_yaw_estimator(dataset)};
}

}  // namespace mlfd::demo
