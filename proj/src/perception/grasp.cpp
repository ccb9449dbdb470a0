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

#include "mlfd/perception/grasp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "mlfd/common/error.hpp"

namespace mlfd::perception {

using geometry::Pose;
using geometry::Vec3;

namespace {
constexpr char kMagic[8] = {'M', 'L', 'F', 'D', 'E', 'S', 'T', '1'};
}  // namespace

void TargetEstimator::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  const double h[6] = {hue.hue_deg,  hue.hue_tolerance_deg, hue.min_saturation,
                       hue.min_value, hue.area_m2,          hue.min_fraction};
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(h), sizeof(h));
  yaw.write(out);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

TargetEstimator TargetEstimator::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  char magic[sizeof(kMagic)];
  double h[6];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(h), sizeof(h));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kIoError, path + " is not an estimator file");
  }
  TargetEstimator est;
  est.hue = {h[0], h[1], h[2], h[3], h[4], h[5]};
  est.yaw = YawEstimator::read(in);
  return est;
}

GraspEstimate estimate_grasp_pose(const Detection& det, const Image& image,
                                  const geometry::CameraModel& cam, const YawEstimator& yaw) {
  if (det.none) throw Error(ErrorCode::kNoDetection, "no target detected");
  if (det.median_depth <= 0.0) throw Error(ErrorCode::kNoDetection, "detection has no depth");
  GraspEstimate est;
  est.position = geometry::pixel_to_point(cam, det.box.center(), det.median_depth);
  const YawPrediction pred = yaw.predict(crop_features(image, det.box));
  est.yaw = pred.yaw;
  est.confidence = det.score * pred.agreement;
  return est;
}

Pose grasp_pose_in_world(const GraspEstimate& est, const Pose& ee_pose,
                         const geometry::CameraModel& cam) {
  const Vec3 p = cam.camera_pose(ee_pose) * est.position;
  return Pose(ee_pose.rotation() * geometry::Quat(Eigen::AngleAxisd(est.yaw, Vec3::UnitZ())), p);
}

std::vector<Pose> spiral_waypoints(const Pose& start, const SearchParams& params) {
  std::vector<Pose> out;
  int x = 0;
  int y = 0;
  int dx = 1;
  int dy = 0;
  int leg = 1;
  while (static_cast<int>(out.size()) < params.max_waypoints) {
    for (int rep = 0; rep < 2 && static_cast<int>(out.size()) < params.max_waypoints; ++rep) {
      for (int s = 0; s < leg && static_cast<int>(out.size()) < params.max_waypoints; ++s) {
        x += dx;
        y += dy;
        out.emplace_back(start.rotation(),
                         start.translation() + Vec3(x * params.spacing, y * params.spacing, 0.0));
      }
      const int t = dx;
      dx = -dy;
      dy = t;
    }
    ++leg;
  }
  return out;
}

std::vector<Pose> search_behavior(const Pose& start, const std::function<bool(const Pose&)>& visible,
                                  const SearchParams& params) {
  std::vector<Pose> visited;
  if (visible(start)) return visited;
  for (const Pose& p : spiral_waypoints(start, params)) {
    visited.push_back(p);
    if (visible(p)) return visited;
  }
  throw Error(ErrorCode::kSearchExhausted,
              "target not found after " + std::to_string(visited.size()) + " waypoints");
}

}  // namespace mlfd::perception
