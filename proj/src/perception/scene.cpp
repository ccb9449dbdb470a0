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

#include "mlfd/perception/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "mlfd/mechanism/kinematics.hpp"

namespace mlfd::perception {
namespace {

Rgb to_rgb(const std::array<int, 3>& c) {
  auto ch = [](int x) { return static_cast<std::uint8_t>(std::clamp(x, 0, 255)); };
  return {ch(c[0]), ch(c[1]), ch(c[2])};
}

Rgb shade(const Rgb& c, double light) {
  auto ch = [light](std::uint8_t x) {
    return static_cast<std::uint8_t>(std::lround(light * x + (1.0 - light) * 128.0));
  };
  return {ch(c.r), ch(c.g), ch(c.b)};
}

// Ray parameter of the first hit, or +inf. The ray is o + t d.
double intersect(const Primitive& p, const Vec3& o, const Vec3& d) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (p.kind == Primitive::Kind::kSphere) {
    const Vec3 oc = o - p.pose.translation();
    const double a = d.squaredNorm();
    const double b = oc.dot(d);
    const double c = oc.squaredNorm() - p.radius * p.radius;
    const double disc = b * b - a * c;
    if (disc < 0.0) return kInf;
    const double t = (-b - std::sqrt(disc)) / a;
    return t > 0.0 ? t : kInf;
  }
  const Eigen::Matrix3d rt = p.pose.rotation_matrix().transpose();
  const Vec3 lo = rt * (o - p.pose.translation());
  const Vec3 ld = rt * d;
  double tmin = 0.0;
  double tmax = kInf;
  for (int i = 0; i < 3; ++i) {
    const double h = p.half_extents[i];
    if (std::abs(ld[i]) < 1e-15) {
      if (std::abs(lo[i]) > h) return kInf;
      continue;
    }
    double t1 = (-h - lo[i]) / ld[i];
    double t2 = (h - lo[i]) / ld[i];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return kInf;
  }
  return tmin > 0.0 ? tmin : kInf;
}

struct Rect {
  int u1, v1, u2, v2;  // inclusive-exclusive
};

// Conservative pixel rectangle covering the primitive, full image if any
// corner lies behind the camera.
Rect footprint(const Primitive& p, const geometry::CameraModel& cam, const Pose& world_to_cam) {
  const Rect full{0, 0, cam.width, cam.height};
  std::vector<Vec3> corners;
  if (p.kind == Primitive::Kind::kSphere) {
    const double r = p.radius;
    for (int i = 0; i < 8; ++i) {
      corners.push_back(p.pose.translation() + Vec3((i & 1) ? r : -r, (i & 2) ? r : -r, (i & 4) ? r : -r));
    }
  } else {
    const Vec3& h = p.half_extents;
    for (int i = 0; i < 8; ++i) {
      corners.push_back(p.pose * Vec3((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                                      (i & 4) ? h.z() : -h.z()));
    }
  }
  double u1 = std::numeric_limits<double>::infinity();
  double v1 = u1;
  double u2 = -u1;
  double v2 = -u1;
  for (const Vec3& c : corners) {
    const Vec3 pc = world_to_cam * c;
    if (pc.z() <= 1e-6) return full;
    const double u = cam.fx * pc.x() / pc.z() + cam.u0;
    const double v = cam.fy * pc.y() / pc.z() + cam.v0;
    u1 = std::min(u1, u);
    v1 = std::min(v1, v);
    u2 = std::max(u2, u);
    v2 = std::max(v2, v);
  }
  auto clampi = [](double x, int hi) {
    return static_cast<int>(std::clamp(x, 0.0, static_cast<double>(hi)));
  };
  return {clampi(std::floor(u1) - 1, cam.width), clampi(std::floor(v1) - 1, cam.height),
          clampi(std::ceil(u2) + 1, cam.width), clampi(std::ceil(v2) + 1, cam.height)};
}

}  // namespace

Scene scene_for_mechanism(const mechanism::MechanismModel& model, const Pose& handle_pose,
                          bool degraded) {
  const mechanism::Appearance& a = model.appearance;
  Scene scene;

  Primitive body;
  body.pose = model.base_pose * Pose::from_translation(Vec3(0, 0, a.body_half_extents.z()));
  body.half_extents = a.body_half_extents;
  body.color = to_rgb(a.body_rgb);
  scene.primitives.push_back(body);

  // Handle +z points into the object, so the plate hangs below the frame.
  const double w = a.object_width;
  const double t = a.knob_thickness;
  Primitive plate;
  plate.pose = handle_pose * Pose::from_translation(Vec3(0, 0, 0.5 * t));
  plate.half_extents = Vec3(0.5 * w, 0.5 * w, 0.5 * t);
  plate.color = to_rgb(degraded ? a.degraded_target_rgb : a.target_rgb);
  scene.primitives.push_back(plate);

  // Raised 1 mm so it wins the depth test; kept off the plate edge so the
  // target outline stays square.
  Primitive strip;
  strip.pose = handle_pose * Pose::from_translation(Vec3(0.25 * w, 0, 0.5 * t - 0.001));
  strip.half_extents = Vec3(0.15 * w, 0.1 * w, 0.5 * t);
  strip.color = to_rgb(a.marking_rgb);
  scene.primitives.push_back(strip);
  return scene;
}

void add_distractors(Scene& scene, const mechanism::MechanismModel& model, Rng& rng, int count) {
  static const std::array<Rgb, 4> kColors{{{200, 40, 40}, {40, 60, 200}, {210, 200, 40}, {190, 50, 190}}};
  const Vec3 base = model.base_pose.translation();
  const double keep_out =
      std::hypot(model.appearance.body_half_extents.x(), model.appearance.body_half_extents.y()) + 0.04;
  for (int i = 0; i < count; ++i) {
    Vec3 c;
    do {
      c = base + Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0.0);
    } while (std::hypot(c.x() - base.x(), c.y() - base.y()) < keep_out + 0.03);
    Primitive p;
    double yaw = 0.0;
    p.color = kColors[static_cast<std::size_t>(i) % kColors.size()];
    if (rng.bernoulli(0.5)) {
      p.kind = Primitive::Kind::kSphere;
      p.radius = rng.uniform(0.015, 0.03);
      c.z() = p.radius;
    } else {
      p.half_extents = Vec3(rng.uniform(0.01, 0.03), rng.uniform(0.01, 0.03), rng.uniform(0.01, 0.04));
      c.z() = p.half_extents.z();
      yaw = rng.uniform(-M_PI, M_PI);
    }
    p.pose = Pose::from_yaw(yaw, c);
    scene.primitives.push_back(p);
  }
}

Image render(const Scene& scene, const geometry::CameraModel& cam, const Pose& camera_pose) {
  Image img(cam.width, cam.height, shade(scene.background, scene.light), true, kFarDepth);
  const Pose world_to_cam = camera_pose.inverse();
  const Eigen::Matrix3d rc = camera_pose.rotation_matrix();
  const Vec3 o = camera_pose.translation();

  // Depth buffer in ray parameter units: rays have unit camera-frame z, so
  // the parameter equals depth.
  std::vector<double> best(static_cast<std::size_t>(cam.width) * cam.height,
                           std::numeric_limits<double>::infinity());
  auto ray = [&](int u, int v) {
    return Vec3(rc * Vec3((u + 0.5 - cam.u0) / cam.fx, (v + 0.5 - cam.v0) / cam.fy, 1.0));
  };

  if (scene.table) {
    const Rgb c = shade(scene.table_color, scene.light);
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        const Vec3 d = ray(u, v);
        if (d.z() >= -1e-12) continue;
        const double t = -o.z() / d.z();
        if (t <= 0.0) continue;
        const std::size_t i = static_cast<std::size_t>(v) * cam.width + u;
        best[i] = t;
        img.pixels[i] = c;
      }
    }
  }
  for (const Primitive& p : scene.primitives) {
    const Rect r = footprint(p, cam, world_to_cam);
    const Rgb c = shade(p.color, scene.light);
    for (int v = r.v1; v < r.v2; ++v) {
      for (int u = r.u1; u < r.u2; ++u) {
        const double t = intersect(p, o, ray(u, v));
        const std::size_t i = static_cast<std::size_t>(v) * cam.width + u;
        if (t < best[i]) {
          best[i] = t;
          img.pixels[i] = c;
        }
      }
    }
  }
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (std::isfinite(best[i])) img.depth[i] = static_cast<float>(std::min<double>(best[i], kFarDepth));
  }
  return img;
}

}  // namespace mlfd::perception
