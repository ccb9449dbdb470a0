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

#include <functional>
#include <string>
#include <vector>

#include "mlfd/geometry/camera.hpp"
#include "mlfd/perception/detect.hpp"
#include "mlfd/perception/yaw.hpp"

namespace mlfd::perception {

/// Detector color model and yaw index, stored together in one file.
struct TargetEstimator {
  HueModel hue;
  YawEstimator yaw;

  /// Throws IoError.
  void save(const std::string& path) const;
  static TargetEstimator load(const std::string& path);
};

struct GraspEstimate {
  geometry::Vec3 position{0, 0, 0};  // camera frame, meters
  double yaw = 0.0;                   // relative tool-to-grasp rotation about z
  double confidence = 0.0;
};

/// Back-projects the box center at the component's median depth and reads
/// yaw from the crop. Throws NoDetection when det is none.
GraspEstimate estimate_grasp_pose(const Detection& det, const Image& image,
                                  const geometry::CameraModel& cam, const YawEstimator& yaw);

/// World grasp pose implied by an estimate taken at ee_pose.
geometry::Pose grasp_pose_in_world(const GraspEstimate& est, const geometry::Pose& ee_pose,
                                   const geometry::CameraModel& cam);

struct SearchParams {
  int max_waypoints = 32;
  double spacing = 0.15;  // m between neighboring spiral cells
};

/// Square spiral around start at start's height and orientation, excluding
/// start itself.
std::vector<geometry::Pose> spiral_waypoints(const geometry::Pose& start, const SearchParams& params);

/// Visits spiral waypoints until visible(pose) holds. Returns the visited
/// waypoints, the last being where the target was seen; empty if it is
/// visible from start. Throws SearchExhausted.
std::vector<geometry::Pose> search_behavior(const geometry::Pose& start,
                                            const std::function<bool(const geometry::Pose&)>& visible,
                                            const SearchParams& params = {});

}  // namespace mlfd::perception
