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

#include <Eigen/Core>

namespace mlfd::mechanism {

struct BoxLsqResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // squared residual norm
  bool feasible = false;
};

/// Minimizes |A x - b|^2 subject to lo <= x <= hi by enumerating active sets.
/// Exact for the small joint counts of mechanism models (3^n candidates).
/// Among equal-cost optima the one found first (fewest active bounds, then
/// minimum norm over free variables) is returned.
BoxLsqResult solve_box_lsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

}  // namespace mlfd::mechanism
