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

#include "mlfd/demo/trajectory.hpp"
#include "mlfd/geometry/camera.hpp"
#include "mlfd/perception/grasp.hpp"
#include "mlfd/perception/scene.hpp"

namespace mlfd::demo {

struct FunnelRing {
  double radius = 0.0;  // m, lateral offset from the grasp point
  double height = 0.0;  // m, tool point above the grasp frame
  int positions = 1;
};

struct FunnelPlan {
  std::vector<FunnelRing> rings;
  std::vector<double> yaw_offsets;  // rad

  /// Throws InvalidArgument.
  void validate() const;
  std::size_t size() const;

  /// 5 rings from 0.12 m / 0.35 m down to 0.02 m / 0.15 m, 25 positions per
  /// ring, 36 yaw offsets covering the full turn in 10 degree steps.
  static FunnelPlan standard();
};

/// Ring-major, then position, then yaw. Every pose keeps the tool z axis
/// parallel to the grasp z axis.
std::vector<Pose> generate_funnel_poses(const Pose& grasp_pose, const FunnelPlan& plan);

/// Evenly spaced poses along the demonstrated approach, up to the grasp.
std::vector<Pose> approach_poses(const DemoTrajectory& demo, int count = 50);

struct GraspRecord {
  geometry::GraspLabel label;
  Pose ee_pose;
  std::vector<float> features;  // crop of the label box
  std::string image_file;       // relative to the dataset directory, if written
};

struct GraspDataset {
  std::vector<GraspRecord> records;
  int dropped = 0;  // out of view or behind the camera
  perception::HueModel hue;
  bool has_hue = false;
};

struct LabelOptions {
  // Writes <dir>/images/NNNNN.png, the depth sidecar NNNNN_depth.png and
  // <dir>/index.jsonl when set.
  std::optional<std::string> out_dir;
};

/// Renders scene from every pose and labels it from the known grasp pose.
GraspDataset generate_grasp_labels(const std::vector<Pose>& poses, const Pose& grasp_pose,
                                   const geometry::CameraModel& cam, double object_width,
                                   const perception::Scene& scene, const LabelOptions& options = {});

/// meta.json: record and drop counts plus the hue model when present.
void write_dataset_meta(const std::string& dir, const GraspDataset& dataset);

/// Renders the demonstration's grasp-time view and fits the detector color
/// model from the labeled target box.
perception::HueModel fit_hue_from_demo(const DemoTrajectory& demo, const perception::Scene& scene,
                                       const geometry::CameraModel& cam, double object_width);

/// Reads index.jsonl and recomputes crop features from the stored images.
/// Throws IoError or SchemaError.
GraspDataset load_grasp_dataset(const std::string& dir);

/// Throws EmptyDataset.
perception::YawEstimator fit_yaw_estimator(const GraspDataset& dataset);
/// Throws EmptyDataset, or ConfigError when the dataset carries no hue model.
perception::TargetEstimator fit_target_estimator(const GraspDataset& dataset);

}  // namespace mlfd::demo
