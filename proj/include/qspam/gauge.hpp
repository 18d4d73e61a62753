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

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "qspam/errors.hpp"
#include "qspam/model.hpp"
#include "qspam/polytope.hpp"
#include "qspam/shape.hpp"

namespace qspam {

// ---------------------------------------------------------------------------
// Subsystem depolarizing gauge
//
// For a non-empty qudit subset Omega and weight p, the map that replaces
// the state on Omega by the maximally mixed state with probability p acts
// on diagonal models as an orbit average. Applying it to the preparation
// while applying the inverse-weight map to every measurement effect leaves
// every observable outcome distribution unchanged: this is the gauge
// freedom of the incoherent SPAM model.
// ---------------------------------------------------------------------------

/** Gauge transformation parameters: qudit subset (bitmask) and weight. */
struct GaugeParam {
  std::uint32_t omega = 1;
  double p = 0.0;
};

/** Weight of the inverse depolarizing map, p* = -p / (1 - p). */
inline double inverse_parameter(double p) {
  if (p >= 1.0)
    throw DivergentInverse("depolarizing weight p >= 1 has no inverse");
  return -p / (1.0 - p);
}

namespace detail {

/** In place: x <- (1-p) x + (p / |orbit|) * orbit sums, where orbits are
 *  the index classes that agree outside omega. */
inline void depolarize_inplace(const SystemShape& sh, std::uint32_t omega,
                               double p, Eigen::VectorXd& x) {
  const int D = sh.dim;
  const double w = p / sh.subset_dim(omega);
  Eigen::VectorXd orbit_sum = Eigen::VectorXd::Zero(D);
  for (int i = 0; i < D; ++i) orbit_sum[sh.zero_inside(omega, i)] += x[i];
  for (int i = 0; i < D; ++i)
    x[i] = (1.0 - p) * x[i] + w * orbit_sum[sh.zero_inside(omega, i)];
}

}  // namespace detail

/** Exact gauge transformation: depolarize the preparation with weight p on
 *  omega and counter-rotate every measurement effect with the inverse
 *  weight. Observable distributions are unchanged for any valid model.
 *
 *  Throws GaugeInfeasible when some transformed entry drops below -1e-12
 *  (the gauge orbit leaves the positive model set at this weight).
 */
inline SpamModel apply_gauge_exact(const SpamModel& m, const GaugeParam& g) {
  if (g.omega == 0 || g.omega >= (1u << m.shape.n))
    throw IndexOutOfRange("gauge subset must be a non-empty qudit subset");
  const double ps = inverse_parameter(g.p);
  SpamModel out = m;
  detail::depolarize_inplace(m.shape, g.omega, g.p, out.prep);
  // Rows of the confusion matrix are the diagonal measurement effects;
  // the adjoint of the depolarizing map equals the map itself here.
  for (int l = 0; l < m.shape.dim; ++l) {
    Eigen::VectorXd row = out.confusion.row(l).transpose();
    detail::depolarize_inplace(m.shape, g.omega, ps, row);
    out.confusion.row(l) = row.transpose();
  }
  double least = std::min(out.prep.minCoeff(), out.confusion.minCoeff());
  if (least < -1e-12)
    throw GaugeInfeasible("gauge weight pushes a model entry below zero");
  return out;
}

// ---------------------------------------------------------------------------
// First-order generators
// ---------------------------------------------------------------------------

/** Direction of the gauge orbit at the ideal model, scaled so entries are
 *  integers: +1 on prep errors c_j whose nonzero digits sit inside omega,
 *  -1 on confusions s_{l,k} where l and k agree outside omega. */
inline Eigen::VectorXd linearized_generator(const SystemShape& sh,
                                            std::uint32_t omega) {
  if (omega == 0 || omega >= (1u << sh.n))
    throw IndexOutOfRange("generator subset must be a non-empty qudit subset");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(sh.num_params());
  for (int j = 1; j < sh.dim; ++j)
    if (sh.zero_off(omega, j)) g[prep_param_index(sh, j)] = 1.0;
  for (int l = 0; l < sh.dim; ++l)
    for (int k = 0; k < sh.dim; ++k)
      if (l != k && sh.agree_off(omega, l, k))
        g[confusion_param_index(sh, l, k)] = -1.0;
  return g;
}

/** Moebius-inverted generator: +1 exactly on c_j with nonzero-digit
 *  pattern omega, -1 exactly on s_{l,k} whose disagreement pattern is
 *  omega. Equals the alternating subset sum of linearized generators. */
inline Eigen::VectorXd mobius_generator(const SystemShape& sh,
                                        std::uint32_t omega) {
  if (omega == 0 || omega >= (1u << sh.n))
    throw IndexOutOfRange("generator subset must be a non-empty qudit subset");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(sh.num_params());
  for (int j = 1; j < sh.dim; ++j)
    if (sh.pattern(j) == omega) g[prep_param_index(sh, j)] = 1.0;
  for (int l = 0; l < sh.dim; ++l)
    for (int k = 0; k < sh.dim; ++k)
      if (l != k && sh.disagree_mask(l, k) == omega)
        g[confusion_param_index(sh, l, k)] = -1.0;
  return g;
}

/** All linearized generators stacked in canonical subset order (ascending
 *  bitmask), one row per non-empty omega: (2^n - 1) x (d^2n - 1). */
inline Eigen::MatrixXd gauge_generator_matrix(const SystemShape& sh) {
  Eigen::MatrixXd G(sh.num_subsets(), sh.num_params());
  for (std::uint32_t omega = 1; omega < (1u << sh.n); ++omega)
    G.row(omega - 1) = linearized_generator(sh, omega).transpose();
  return G;
}

/** Numerical rank with singular values above 1e-9 relative. */
inline int matrix_rank(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  double thresh = 1e-9 * sv[0];
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > thresh) ++r;
  return r;
}

inline int gauge_rank(const SystemShape& sh) {
  return matrix_rank(gauge_generator_matrix(sh));
}

/** A linear functional of the error parameters is learnable from data iff
 *  it is orthogonal to every gauge direction. */
inline bool is_learnable(const Eigen::VectorXd& f, const SystemShape& sh,
                         double tol = 1e-12) {
  for (std::uint32_t omega = 1; omega < (1u << sh.n); ++omega)
    if (std::abs(f.dot(linearized_generator(sh, omega))) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Ambiguity intervals
// ---------------------------------------------------------------------------

/** Range of values a parameter takes over the positivity-constrained
 *  gauge orbit of an estimate. */
struct AmbiguityInterval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double x, double tol = 0.0) const {
    return x >= lower - tol && x <= upper + tol;
  }
};

/** The positivity region of first-order gauge shifts around eps_hat:
 *  {t : eps_hat + G^T t >= 0}, with one variable per non-empty subset.
 *  eps_hat must be nonnegative up to 1e-10 (clip first; throws
 *  InfeasibleEstimate otherwise). The returned region contains t = 0. */
inline Polytope gauge_polytope(const EpsilonVector& eps_hat) {
  Eigen::VectorXd b = eps_hat.values;
  for (int i = 0; i < static_cast<int>(b.size()); ++i) {
    if (b[i] < -1e-10)
      throw InfeasibleEstimate(
          "parameter " +
          param_label_string(eps_hat.shape, param_label(eps_hat.shape, i)) +
          " is negative; clip the estimate before requesting intervals");
    if (b[i] < 0.0) b[i] = 0.0;
  }
  return Polytope(gauge_generator_matrix(eps_hat.shape).transpose(),
                  std::move(b));
}

/** [min, max] of one labeled parameter over all first-order gauge shifts
 *  of eps_hat that keep every parameter nonnegative. */
inline AmbiguityInterval parameter_interval(const EpsilonVector& eps_hat,
                                            const ParamLabel& label) {
  Polytope poly = gauge_polytope(eps_hat);
  auto [lo, hi] = poly.coordinate_interval(param_index(eps_hat.shape, label));
  return {lo, hi};
}

/** All parameter intervals at once; shares one vertex enumeration. */
inline std::vector<AmbiguityInterval> all_parameter_intervals(
    const EpsilonVector& eps_hat) {
  Polytope poly = gauge_polytope(eps_hat);
  std::vector<AmbiguityInterval> out(eps_hat.shape.num_params());
  for (int i = 0; i < eps_hat.shape.num_params(); ++i) {
    auto [lo, hi] = poly.coordinate_interval(i);
    out[i] = {lo, hi};
  }
  return out;
}

}  // namespace qspam
