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

#include "mlfd/perception/yaw.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "mlfd/common/error.hpp"

namespace mlfd::perception {
namespace {

constexpr char kMagic[8] = {'M', 'L', 'F', 'D', 'Y', 'A', 'W', '1'};

double gray(const Rgb& c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

double sample(const Image& img, double x, double y) {
  // Pixel centers sit at integer + 0.5.
  x = std::clamp(x - 0.5, 0.0, img.width - 1.0);
  y = std::clamp(y - 0.5, 0.0, img.height - 1.0);
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  return (1 - fy) * ((1 - fx) * gray(img.at(x0, y0)) + fx * gray(img.at(x1, y0))) +
         fy * ((1 - fx) * gray(img.at(x0, y1)) + fx * gray(img.at(x1, y1)));
}

}  // namespace

std::vector<float> crop_features(const Image& image, const geometry::PixelBox& box) {
  if (!box.valid()) throw Error(ErrorCode::kInvalidArgument, "crop box is empty");
  const geometry::PixelBox b = box.scaled(kCropMargin);
  std::vector<double> v(static_cast<std::size_t>(kCropSize) * kCropSize);
  double mean = 0.0;
  for (int r = 0; r < kCropSize; ++r) {
    for (int c = 0; c < kCropSize; ++c) {
      const double x = b.u1 + (c + 0.5) * b.width() / kCropSize;
      const double y = b.v1 + (r + 0.5) * b.height() / kCropSize;
      const double g = sample(image, x, y);
      v[static_cast<std::size_t>(r) * kCropSize + c] = g;
      mean += g;
    }
  }
  mean /= static_cast<double>(v.size());
  double norm = 0.0;
  for (double& x : v) {
    x -= mean;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = norm > 1e-9 ? static_cast<float>(v[i] / norm) : 0.0f;
  }
  return out;
}

YawEstimator::YawEstimator(std::vector<YawSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyDataset, "yaw estimator needs at least one sample");
  dim_ = samples.front().features.size();
  features_.reserve(samples.size() * dim_);
  for (const YawSample& s : samples) {
    if (s.features.size() != dim_) {
      throw Error(ErrorCode::kInvalidArgument, "inconsistent feature dimension");
    }
    features_.insert(features_.end(), s.features.begin(), s.features.end());
    yaws_.push_back(s.yaw);
  }
}

YawPrediction YawEstimator::predict(const std::vector<float>& features) const {
  if (empty()) throw Error(ErrorCode::kEmptyDataset, "yaw estimator is empty");
  if (features.size() != dim_) throw Error(ErrorCode::kInvalidArgument, "feature dimension mismatch");
  // Unit-norm features: smallest distance is largest dot product.
  const std::size_t k = std::min<std::size_t>(kNeighbors, yaws_.size());
  const Eigen::Map<const Eigen::MatrixXf> index(features_.data(), static_cast<Eigen::Index>(dim_),
                                                static_cast<Eigen::Index>(yaws_.size()));
  const Eigen::Map<const Eigen::VectorXf> query(features.data(), static_cast<Eigen::Index>(dim_));
  const Eigen::VectorXf dots = index.transpose() * query;
  std::vector<std::pair<double, std::size_t>> top;  // (dot, index), sorted descending
  for (std::size_t i = 0; i < yaws_.size(); ++i) {
    const double dot = dots[static_cast<Eigen::Index>(i)];
    if (top.size() < k || dot > top.back().first) {
      top.emplace_back(dot, i);
      std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
      });
      if (top.size() > k) top.pop_back();
    }
  }
  // An exact member is its own answer.
  if (top.front().first >= 1.0 - 1e-6) {
    return {yaws_[top.front().second], 1.0};
  }
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& [dot, i] : top) {
    sx += std::cos(yaws_[i]);
    sy += std::sin(yaws_[i]);
  }
  return {std::atan2(sy, sx), std::min(1.0, std::hypot(sx, sy) / static_cast<double>(top.size()))};
}

void YawEstimator::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  write(out);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

YawEstimator YawEstimator::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  return read(in);
}

void YawEstimator::write(std::ostream& out) const {
  const std::uint64_t n = yaws_.size();
  const std::uint64_t d = dim_;
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(yaws_.data()), static_cast<std::streamsize>(n * sizeof(double)));
  out.write(reinterpret_cast<const char*>(features_.data()),
            static_cast<std::streamsize>(features_.size() * sizeof(float)));
}

YawEstimator YawEstimator::read(std::istream& in) {
  char magic[sizeof(kMagic)];
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kIoError, "not a yaw estimator index");
  }
  if (n == 0) throw Error(ErrorCode::kEmptyDataset, "yaw index holds no samples");
  if (d == 0 || d > (1u << 20) || n > (1u << 24)) throw Error(ErrorCode::kIoError, "yaw index has a bad header");
  YawEstimator est;
  est.dim_ = d;
  est.yaws_.resize(n);
  est.features_.resize(n * d);
  in.read(reinterpret_cast<char*>(est.yaws_.data()), static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(est.features_.data()),
          static_cast<std::streamsize>(n * d * sizeof(float)));
  if (!in) throw Error(ErrorCode::kIoError, "yaw index is truncated");
  return est;
}

}  // namespace mlfd::perception
