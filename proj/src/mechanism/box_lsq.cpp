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

#include "mlfd/mechanism/box_lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/QR>

#include "mlfd/common/error.hpp"

namespace mlfd::mechanism {

namespace {

constexpr double kBoundSlack = 1e-12;

// assignment digit: 0 free, 1 at lower bound, 2 at upper bound
BoxLsqResult solve_with_assignment(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                   const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                   const std::vector<int>& assignment) {
  const Eigen::Index n = a.cols();
  BoxLsqResult out;
  out.x = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (assignment[i] == 1) {
      out.x[i] = lo[i];
    } else if (assignment[i] == 2) {
      out.x[i] = hi[i];
    } else {
      free_idx.push_back(i);
    }
  }
  if (!free_idx.empty()) {
    Eigen::MatrixXd a_free(a.rows(), static_cast<Eigen::Index>(free_idx.size()));
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      a_free.col(static_cast<Eigen::Index>(k)) = a.col(free_idx[k]);
    }
    const Eigen::VectorXd rhs = b - a * out.x;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a_free);
    cod.setThreshold(1e-10);
    const Eigen::VectorXd x_free = cod.solve(rhs);
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      const Eigen::Index i = free_idx[k];
      const double xi = x_free[static_cast<Eigen::Index>(k)];
      const double scale = 1.0 + std::abs(lo[i]) + std::abs(hi[i]);
      if (xi < lo[i] - kBoundSlack * scale || xi > hi[i] + kBoundSlack * scale) {
        return out;  // infeasible
      }
      out.x[i] = std::clamp(xi, lo[i], hi[i]);
    }
  }
  out.cost = (a * out.x - b).squaredNorm();
  out.feasible = true;
  return out;
}

}  // namespace

BoxLsqResult solve_box_lsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const Eigen::Index n = a.cols();
  if (lo.size() != n || hi.size() != n || b.size() != a.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "box least squares: dimension mismatch");
  }
  if (n > 10) {
    throw Error(ErrorCode::kInvalidArgument, "box least squares: too many variables");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lo[i] > hi[i]) throw Error(ErrorCode::kInvalidArgument, "box least squares: lo > hi");
  }

  std::vector<int> assignment(static_cast<std::size_t>(n), 0);
  BoxLsqResult best = solve_with_assignment(a, b, lo, hi, assignment);
  if (best.feasible) return best;  // unconstrained optimum lies in the box

  best.cost = std::numeric_limits<double>::infinity();
  // Visit assignments in order of increasing number of active bounds so that
  // ties resolve toward the least constrained solution.
  long total = 1;
  for (Eigen::Index i = 0; i < n; ++i) total *= 3;
  for (int active = 1; active <= n; ++active) {
    for (long code = 0; code < total; ++code) {
      long c = code;
      int count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        assignment[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
        count += (c % 3) != 0;
        c /= 3;
      }
      if (count != active) continue;
      BoxLsqResult candidate = solve_with_assignment(a, b, lo, hi, assignment);
      if (candidate.feasible && candidate.cost < best.cost - 1e-18) best = candidate;
    }
  }
  return best;
}

}  // namespace mlfd::mechanism
