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
#include <utility>
#include <vector>

#include "qspam/errors.hpp"

namespace qspam {

/** Feasible region {t in R^m : b + A t >= 0}.
 *
 *  b may carry negative entries: the region then excludes t = 0 and can be
 *  empty. For the gauge polytopes in this library A has entries in
 *  {-1, 0, +1} (stacked generators), m is small (2^n - 1 or that plus
 *  violation slacks), and the region is bounded whenever non-empty.
 *
 *  Linear functionals are optimized by exact vertex enumeration for
 *  m <= 3 and by a dense two-phase primal simplex with Bland's rule for
 *  larger m (phase one finds a starting basis when t = 0 is infeasible).
 */
class Polytope {
 public:
  Polytope(Eigen::MatrixXd A, Eigen::VectorXd b)
      : A_(std::move(A)), b_(std::move(b)) {}

  int num_vars() const { return static_cast<int>(A_.cols()); }

  /** Whether the region is non-empty (phase-one violation below tol). */
  bool is_feasible(double tol = 1e-9) const {
    ensure_phase1();
    return infeas1_ <= tol;
  }

  /** Total constraint violation that cannot be removed by any t, as found
   *  by phase one (zero exactly when the region is non-empty). */
  double infeasibility() const {
    ensure_phase1();
    return infeas1_;
  }

  /** A point of the region when non-empty; otherwise the phase-one point
   *  that minimizes the total violation of the unsatisfiable constraints
   *  while keeping the satisfiable ones satisfied. */
  Eigen::VectorXd least_violation_point() const {
    ensure_phase1();
    return t1_;
  }

  /** [min, max] of offset + g.t over the region. Throws
   *  InfeasibleEstimate when the region is empty. */
  std::pair<double, double> functional_interval(const Eigen::VectorXd& g,
                                                double offset) const {
    if (num_vars() <= 3) {
      ensure_vertices();
      if (!verts_.empty()) {
        double lo = offset + g.dot(verts_.front());
        double hi = lo;
        for (const auto& v : verts_) {
          double val = offset + g.dot(v);
          if (val < lo) lo = val;
          if (val > hi) hi = val;
        }
        return {lo, hi};
      }
      // no vertex: empty region (bounded regions always expose one)
    }
    double lo = offset + simplex_min(g);
    double hi = offset - simplex_min(-g);
    return {lo, hi};
  }

  /** [min, max] of row i's slack b_i + A_i.t (a coordinate of the shifted
   *  estimate). Never negative beyond roundoff by construction. */
  std::pair<double, double> coordinate_interval(int i) const {
    auto [lo, hi] = functional_interval(A_.row(i).transpose(), b_[i]);
    if (lo < 0.0) lo = 0.0;
    return {lo, hi};
  }

  /** Feasible vertices (m <= 3 only; enumerated on first use). */
  const std::vector<Eigen::VectorXd>& vertices() const {
    ensure_vertices();
    return verts_;
  }

  /** argmin of c.t over the region, via simplex (any m). Cheaper than
   *  vertex enumeration when only one functional is needed. Throws
   *  InfeasibleEstimate when the region is empty. */
  Eigen::VectorXd minimize(const Eigen::VectorXd& c) const {
    return simplex_argmin(c, nullptr);
  }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  mutable bool verts_done_ = false;
  mutable std::vector<Eigen::VectorXd> verts_;
  mutable bool phase1_done_ = false;
  mutable double infeas1_ = 0.0;
  mutable Eigen::VectorXd t1_;

  void ensure_phase1() const {
    if (phase1_done_) return;
    phase1_done_ = true;
    t1_ = simplex_argmin(Eigen::VectorXd::Zero(num_vars()), &infeas1_);
  }

  // Exact vertex enumeration: every vertex is the solution of m active
  // constraints with linearly independent rows.
  void ensure_vertices() const {
    if (verts_done_) return;
    verts_done_ = true;
    const int m = num_vars();
    const int P = static_cast<int>(A_.rows());
    const double feas_tol =
        1e-9 * std::max(1.0, b_.cwiseAbs().maxCoeff());
    std::vector<int> idx(m);
    Eigen::MatrixXd M(m, m);
    Eigen::VectorXd rhs(m);
    auto visit = [&]() {
      for (int r = 0; r < m; ++r) {
        M.row(r) = A_.row(idx[r]);
        rhs[r] = -b_[idx[r]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      lu.setThreshold(1e-9);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd t = lu.solve(rhs);
      if (((A_ * t + b_).array() < -feas_tol).any()) return;
      verts_.push_back(t);
    };
    // iterate over all m-combinations of row indices
    for (int i = 0; i < m; ++i) idx[i] = i;
    if (P < m) return;
    while (true) {
      visit();
      int pos = m - 1;
      while (pos >= 0 && idx[pos] == P - m + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int r = pos + 1; r < m; ++r) idx[r] = idx[r - 1] + 1;
    }
  }

  double simplex_min(const Eigen::VectorXd& c) const {
    return c.dot(simplex_argmin(c, nullptr));
  }

  /** Two-phase primal simplex, minimize c.t over {b + A t >= 0}.
   *
   *  Standard form with t = u - v (u, v >= 0) and slacks s >= 0:
   *  rows with b_i >= 0 enter as  -A u + A v + s = b  with s_i basic;
   *  rows with b_i <  0 are negated and receive an artificial variable
   *  that starts basic and is minimized away in phase one. Bland's rule
   *  (smallest index on entry, smallest basis label on ties) guarantees
   *  termination.
   *
   *  When `infeas_out` is null an empty region throws InfeasibleEstimate;
   *  otherwise the residual phase-one objective is reported through it
   *  and the least-violation point is returned.
   */
  Eigen::VectorXd simplex_argmin(const Eigen::VectorXd& c,
                                 double* infeas_out) const {
    const int m = num_vars();
    const int P = static_cast<int>(A_.rows());
    const int nv = 2 * m + P;  // real columns: u, v, s
    const double tol = 1e-11;

    std::vector<int> art_col(P, -1);
    int na = 0;
    for (int i = 0; i < P; ++i)
      if (b_[i] < 0.0) art_col[i] = nv + na++;
    const int nt = nv + na;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(P, nt + 1);
    std::vector<int> basis(P);
    for (int i = 0; i < P; ++i) {
      const double sign = (b_[i] < 0.0) ? -1.0 : 1.0;
      T.block(i, 0, 1, m) = -sign * A_.row(i);
      T.block(i, m, 1, m) = sign * A_.row(i);
      T(i, 2 * m + i) = sign;
      T(i, nt) = sign * b_[i];
      if (art_col[i] >= 0) {
        T(i, art_col[i]) = 1.0;
        basis[i] = art_col[i];
      } else {
        basis[i] = 2 * m + i;
      }
    }

    // Bland pivot loop over columns [0, max_col).
    auto run = [&](Eigen::VectorXd& red, int max_col) {
      for (int iter = 0; iter < 200000; ++iter) {
        int enter = -1;
        for (int jcol = 0; jcol < max_col; ++jcol) {
          if (red[jcol] < -tol) {
            enter = jcol;
            break;
          }
        }
        if (enter < 0) return;  // optimal
        int leave = -1;
        double best = 0.0;
        for (int i = 0; i < P; ++i) {
          if (T(i, enter) > tol) {
            double ratio = T(i, nt) / T(i, enter);
            if (leave < 0 || ratio < best - tol ||
                (ratio < best + tol && basis[i] < basis[leave])) {
              leave = i;
              best = ratio;
            }
          }
        }
        if (leave < 0)
          throw Error("internal: gauge polytope unbounded in simplex");
        double piv = T(leave, enter);
        T.row(leave) /= piv;
        for (int i = 0; i < P; ++i) {
          if (i == leave) continue;
          double f = T(i, enter);
          if (f != 0.0) T.row(i) -= f * T.row(leave);
        }
        double fr = red[enter];
        red -= fr * T.row(leave).head(nt).transpose();
        basis[leave] = enter;
      }
      throw Error("internal: simplex failed to terminate");
    };

    // Reduced costs of a cost vector over all columns given the basis.
    auto reduced = [&](const Eigen::VectorXd& cost) {
      Eigen::VectorXd red = cost;
      for (int i = 0; i < P; ++i) {
        const double cb = cost[basis[i]];
        if (cb != 0.0) red -= cb * T.row(i).head(nt).transpose();
      }
      return red;
    };

    double infeas = 0.0;
    if (na > 0) {
      Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(nt);
      cost1.tail(na).setOnes();
      Eigen::VectorXd red1 = reduced(cost1);
      run(red1, nt);
      for (int i = 0; i < P; ++i)
        if (basis[i] >= nv) infeas += T(i, nt);
      // Degenerate basic artificials: pivot them onto any real column so
      // a later pivot cannot push them positive again. An all-zero row is
      // redundant and can keep its artificial (it never pivots).
      for (int i = 0; i < P; ++i) {
        if (basis[i] < nv || T(i, nt) > tol) continue;
        for (int jcol = 0; jcol < nv; ++jcol) {
          if (std::abs(T(i, jcol)) > tol) {
            double piv = T(i, jcol);
            T.row(i) /= piv;
            for (int r = 0; r < P; ++r) {
              if (r == i) continue;
              double f = T(r, jcol);
              if (f != 0.0) T.row(r) -= f * T.row(i);
            }
            basis[i] = jcol;
            break;
          }
        }
      }
    }
    if (infeas_out) *infeas_out = infeas;
    if (infeas > 1e-9 && infeas_out == nullptr)
      throw InfeasibleEstimate(
          "gauge polytope is empty: no shift restores positivity");

    if (infeas <= 1e-9 || infeas_out != nullptr) {
      Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(nt);
      cost2.head(m) = c;
      cost2.segment(m, m) = -c;
      Eigen::VectorXd red2 = reduced(cost2);
      run(red2, nv);  // artificial columns may not re-enter
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(nt);
    for (int i = 0; i < P; ++i) x[basis[i]] = T(i, nt);
    return x.head(m) - x.segment(m, m);
  }
};

}  // namespace qspam
