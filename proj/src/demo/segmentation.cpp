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

#include "mlfd/demo/segmentation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>

#include "mlfd/common/error.hpp"

namespace mlfd::demo {

namespace {

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Sample in [lo, hi] farthest from the line through the window endpoints.
std::size_t corner_in(const std::vector<Vec3>& p, std::size_t lo, std::size_t hi) {
  const Vec3 axis = p[hi] - p[lo];
  const double len = axis.norm();
  std::size_t best = lo;
  double best_d = -1.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const Vec3 r = p[i] - p[lo];
    const double d = len > 0.0 ? r.cross(axis).norm() / len : r.norm();
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

struct Line {
  Vec3 point;
  Vec3 dir;  // unit
  double rms = 0.0;  // perpendicular residual of the fitted samples
};

// Total least squares line through pts, oriented along first -> last.
Line fit_line(const std::vector<Vec3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& q : pts) c += q;
  c /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& q : pts) cov += (q - c) * (q - c).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Vec3 d = eig.eigenvectors().col(2);
  if (d.dot(pts.back() - pts.front()) < 0.0) d = -d;
  const double rms = std::sqrt(std::max(0.0, eig.eigenvalues()(0) + eig.eigenvalues()(1)) /
                               static_cast<double>(pts.size()));
  return {c, d, rms};
}

Vec3 project(const Line& l, const Vec3& q) { return l.point + l.dir * l.dir.dot(q - l.point); }

// Midpoint of the closest approach of two lines, if they come within gap of
// each other and are not nearly parallel.
std::optional<Vec3> junction(const Line& a, const Line& b, double gap) {
  const Vec3 w = a.point - b.point;
  const double c = a.dir.dot(b.dir);
  const double den = 1.0 - c * c;
  if (den < 1e-4) return std::nullopt;
  const double d = a.dir.dot(w);
  const double e = b.dir.dot(w);
  const Vec3 pa = a.point + a.dir * ((c * e - d) / den);
  const Vec3 pb = b.point + b.dir * ((e - c * d) / den);
  if ((pa - pb).norm() > gap) return std::nullopt;
  return Vec3(0.5 * (pa + pb));
}

double distance_to_polyline(const std::vector<Vec3>& pts, const Vec3& q) {
  double best = (pts.front() - q).norm();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec3 ab = pts[i] - pts[i - 1];
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp(ab.dot(q - pts[i - 1]) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (pts[i - 1] + t * ab - q).norm());
  }
  return best;
}

// Per-coordinate noise level of the raw path, from the median residual
// against its smoothed version (corners barely move the median).
double noise_level(const std::vector<Vec3>& raw, const std::vector<Vec3>& smooth) {
  std::vector<double> r(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) r[i] = (raw[i] - smooth[i]).norm();
  auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
  std::nth_element(r.begin(), mid, r.end());
  // Median of a 3-D gaussian residual norm is about 1.54 sigma.
  return *mid / 1.54;
}

}  // namespace

std::vector<Vec3> moving_average(const std::vector<Vec3>& positions, int window) {
  if (window <= 1 || positions.size() < 3) return positions;
  const int n = static_cast<int>(positions.size());
  const int half = window / 2;
  std::vector<Vec3> out(positions.size());
  for (int i = 0; i < n; ++i) {
    // Shrink the window symmetrically near the ends so endpoints stay put.
    const int h = std::min({half, i, n - 1 - i});
    Vec3 sum = Vec3::Zero();
    for (int k = i - h; k <= i + h; ++k) sum += positions[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = sum / (2 * h + 1);
  }
  return out;
}

std::vector<Segment> segment_path(const std::vector<Vec3>& positions,
                                  const SegmentationParams& params) {
  double path = 0.0;
  for (std::size_t i = 1; i < positions.size(); ++i) path += (positions[i] - positions[i - 1]).norm();
  if (positions.size() < 2 || path < params.min_length) {
    throw Error(ErrorCode::kDegenerateTrajectory, "demonstrated path is shorter than the minimum segment");
  }
  const std::vector<Vec3> p = moving_average(positions, params.window);
  // Increments must be long against the residual noise or its jitter reads
  // as turning.
  const double sigma = noise_level(positions, p);
  const double spacing = std::max(params.spacing, 4.0 * sigma);

  // Walk the path resampled by arc length (so the test is independent of
  // timing); restart the walk at each detected corner.
  std::vector<std::size_t> breaks = {0};
  std::size_t start = 0;
  while (true) {
    std::vector<std::size_t> kept = {start};
    int run = 0;
    std::size_t corner = 0;
    for (std::size_t i = start + 1; i < p.size() && corner == 0; ++i) {
      if ((p[i] - p[kept.back()]).norm() < spacing) continue;
      kept.push_back(i);
      const std::size_t n = kept.size();
      if (n < 3) continue;
      const Vec3 chord = p[kept[n - 2]] - p[start];
      const Vec3 inc = p[kept[n - 1]] - p[kept[n - 2]];
      run = angle_between(chord, inc) > params.angle_threshold ? run + 1 : 0;
      if (run == params.sustain) {
        // The first deviating increment starts at kept[first]; the corner lies
        // between its neighbours.
        const std::size_t first = n - 1 - static_cast<std::size_t>(params.sustain);
        corner = corner_in(p, kept[first - 1], kept[first + 1]);
        if (corner <= start) corner = kept[first];
      }
    }
    if (corner == 0) break;
    breaks.push_back(corner);
    start = corner;
  }
  breaks.push_back(p.size() - 1);

  // Merge segments shorter than min_length into their predecessor (or the
  // following segment when first). On noisy paths anything under two
  // increments is jitter as well.
  const double min_length = std::max(params.min_length, 2.0 * spacing);
  auto length = [&](std::size_t a, std::size_t b) { return (p[b] - p[a]).norm(); };
  bool merged = true;
  while (merged && breaks.size() > 2) {
    merged = false;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
      if (length(breaks[s], breaks[s + 1]) < min_length) {
        breaks.erase(breaks.begin() + static_cast<long>(s == 0 ? 1 : s));
        merged = true;
        break;
      }
    }
  }

  // Boundary points from lines fitted to the raw samples of each span, away
  // from the smoothing's reach around corners: the smoothed path cuts
  // corners by an amount that depends on the sampling rate.
  const std::size_t k = breaks.size() - 1;
  const std::size_t trim = static_cast<std::size_t>(std::max(params.window / 2, 0));
  std::vector<Line> lines;
  for (std::size_t s = 0; s < k; ++s) {
    std::size_t a = breaks[s] + (s > 0 ? trim : 0);
    std::size_t b = breaks[s + 1] - (s + 1 < k ? std::min(trim, breaks[s + 1]) : 0);
    if (b <= a + 1) {
      a = breaks[s];
      b = breaks[s + 1];
    }
    lines.push_back(fit_line({positions.begin() + static_cast<std::ptrdiff_t>(a),
                              positions.begin() + static_cast<std::ptrdiff_t>(b) + 1}));
  }
  std::vector<Vec3> bounds(k + 1);
  bounds[0] = project(lines.front(), positions.front());
  bounds[k] = project(lines.back(), positions.back());
  // A junction off the path (curved spans fit poorly by lines) would be an
  // unreachable waypoint; use the corner sample on the straighter side.
  const double on_path = std::max(0.001, 2.0 * sigma);
  for (std::size_t s = 1; s < k; ++s) {
    const std::optional<Vec3> j = junction(lines[s - 1], lines[s], on_path);
    if (j && distance_to_polyline(positions, *j) <= on_path) {
      bounds[s] = *j;
    } else {
      const Line& straight = lines[s - 1].rms <= lines[s].rms ? lines[s - 1] : lines[s];
      bounds[s] = project(straight, positions[breaks[s]]);
    }
  }

  std::vector<Segment> segments;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    Segment seg;
    seg.index = static_cast<int>(s) + 1;
    seg.first_sample = breaks[s];
    seg.last_sample = breaks[s + 1];
    seg.start = bounds[s];
    seg.end = bounds[s + 1];
    const Vec3 net = seg.end - seg.start;
    seg.direction = net.norm() > 1e-9 ? Vec3(net.normalized()) : lines[s].dir;
    segments.push_back(seg);
  }
  return segments;
}

std::vector<Segment> segment_trajectory(const DemoTrajectory& demo,
                                        const SegmentationParams& params) {
  demo.validate();
  const std::size_t from = demo.resolved_grasp_index();
  std::vector<Segment> segments = segment_path(demo.positions(from), params);
  for (Segment& s : segments) {
    s.first_sample += from;
    s.last_sample += from;
  }
  return segments;
}

}  // namespace mlfd::demo
