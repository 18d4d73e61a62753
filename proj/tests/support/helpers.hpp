// Copyright 2026 The qspam developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "qspam/model.hpp"

namespace qspam::testing {

/** Single-qubit model from the three named error rates. */
inline SpamModel qubit_model(double eps_s1, double eps_m10, double eps_m01) {
  EpsilonVector eps{SystemShape{1, 2}};
  eps.prep(1) = eps_s1;
  eps.confusion(1, 0) = eps_m10;
  eps.confusion(0, 1) = eps_m01;
  return from_epsilon(eps);
}

inline std::vector<SystemShape> small_shapes() {
  // All shapes the acceptance gate exercises: single qudits with d = 2..4,
  // two-qudit registers with d = 2, 3, and the three-qubit register.
  return {SystemShape{1, 2}, SystemShape{1, 3}, SystemShape{1, 4},
          SystemShape{2, 2}, SystemShape{2, 3}, SystemShape{3, 2}};
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/** Random model with every error rate in [lo, hi]. Keeping the rates
 *  bounded away from zero guarantees a margin of exactly-feasible gauge
 *  weights, which several orbit tests rely on. */
inline SpamModel banded_random_model(const SystemShape& sh, double lo,
                                     double hi, std::uint64_t seed) {
  SplitMix64 rng(seed);
  EpsilonVector eps(sh);
  for (int i = 0; i < sh.num_params(); ++i)
    eps.values[i] = lo + (hi - lo) * rng.uniform();
  return from_epsilon(eps);
}

}  // namespace qspam::testing
