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

#include <iosfwd>
#include <string>
#include <vector>

#include "mlfd/geometry/camera.hpp"
#include "mlfd/perception/image.hpp"

namespace mlfd::perception {

inline constexpr int kCropSize = 32;
inline constexpr double kCropMargin = 1.2;

/// Grayscale crop of box scaled by kCropMargin, bilinearly resampled to
/// kCropSize x kCropSize, zero mean and unit norm.
std::vector<float> crop_features(const Image& image, const geometry::PixelBox& box);

struct YawSample {
  std::vector<float> features;
  double yaw = 0.0;
};

struct YawPrediction {
  double yaw = 0.0;
  double agreement = 0.0;  // resultant length of the neighbors' unit vectors
};

/// Nearest-neighbor regressor over crop features. Immutable after fit.
class YawEstimator {
 public:
  static constexpr int kNeighbors = 3;

  YawEstimator() = default;
  /// Throws EmptyDataset.
  explicit YawEstimator(std::vector<YawSample> samples);

  YawPrediction predict(const std::vector<float>& features) const;
  std::size_t size() const { return yaws_.size(); }
  bool empty() const { return yaws_.empty(); }

  /// Binary index file. Throws IoError.
  void save(const std::string& path) const;
  static YawEstimator load(const std::string& path);
  void write(std::ostream& out) const;
  static YawEstimator read(std::istream& in);

 private:
  std::size_t dim_ = 0;
  std::vector<float> features_;  // size() rows of dim_
  std::vector<double> yaws_;
};

}  // namespace mlfd::perception
