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

#include <cstddef>
#include <vector>

#include "mlfd/demo/trajectory.hpp"

namespace mlfd::demo {

struct Segment {
  int index = 1;              // 1-based
  Vec3 start = Vec3::Zero();  // p_i
  Vec3 end = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();  // m_i, unit
  std::size_t first_sample = 0;    // span within the segmented samples
  std::size_t last_sample = 0;     // shared with the next segment's first
};

struct SegmentationParams {
  double angle_threshold = 0.5235987755982988;  // rad (30 deg)
  int window = 5;                               // moving-average samples
  double min_length = 0.005;                    // m
  double spacing = 0.0025;                      // arc-length resampling step, m
  int sustain = 3;                              // consecutive deviating increments
};

/// Splits a position sequence into straight-ish segments. Throws
/// DegenerateTrajectory when the path is shorter than min_length.
std::vector<Segment> segment_path(const std::vector<Vec3>& positions,
                                  const SegmentationParams& params = {});

/// Segments the manipulation part of a demonstration (from the grasp sample on).
std::vector<Segment> segment_trajectory(const DemoTrajectory& demo,
                                        const SegmentationParams& params = {});

std::vector<Vec3> moving_average(const std::vector<Vec3>& positions, int window);

}  // namespace mlfd::demo
