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
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspam/design.hpp"
#include "qspam/errors.hpp"
#include "qspam/gauge.hpp"
#include "qspam/model.hpp"
#include "qspam/polytope.hpp"
#include "qspam/simulate.hpp"

namespace qspam {

enum class GaugeConvention { min_sp_error, zero_residual_gauge, fixed_values };

inline std::string to_string(GaugeConvention g) {
  switch (g) {
    case GaugeConvention::min_sp_error: return "min_sp_error";
    case GaugeConvention::zero_residual_gauge: return "zero_residual_gauge";
    case GaugeConvention::fixed_values: return "fixed_values";
  }
  return "min_sp_error";
}

inline GaugeConvention gauge_convention_from_string(const std::string& s) {
  if (s == "min_sp_error") return GaugeConvention::min_sp_error;
  if (s == "zero_residual_gauge") return GaugeConvention::zero_residual_gauge;
  if (s == "fixed_values") return GaugeConvention::fixed_values;
  throw InvalidConfig("unknown gauge convention: " + s);
}

struct EstimateOptions {
  GaugeConvention convention = GaugeConvention::min_sp_error;
  /** fixed_values targets for the binary-pattern prep errors c_Omega, one
   *  per non-empty subset in canonical (ascending bitmask) order. Empty
   *  means all zeros. */
  std::vector<double> fixed_constants;
  bool with_intervals = true;
};

struct EstimateMeta {
  std::int64_t shots = 0;  // per-circuit shots of the first record
  bool heralded = false;
  std::string design_id;
  Eigen::VectorXd pre_clip;  // raw least-squares solution before clipping
  double clip_total = 0.0;   // clipped mass, added to interval ends
};

struct SpamEstimate {
  EpsilonVector eps_hat;  // gauge representative
  GaugeConvention convention = GaugeConvention::min_sp_error;
  std::vector<AmbiguityInterval> intervals;  // by parameter index
  Eigen::VectorXd stderrs;                   // by parameter index
  EstimateMeta meta;
};

namespace detail {

/** Gauge shift selected by the convention, as a vector in parameter space
 *  (G^T t for the chosen t), starting from the clipped estimate. */
inline Eigen::VectorXd convention_shift(const EpsilonVector& eps_clipped,
                                        const EstimateOptions& opts) {
  const SystemShape& sh = eps_clipped.shape;
  const int m = sh.num_subsets();
  const Eigen::MatrixXd G = gauge_generator_matrix(sh);
  switch (opts.convention) {
    case GaugeConvention::zero_residual_gauge:
      // keep the base point: the least-squares solution, moved onto the
      // positive orthant only as far as feasibility required
      return Eigen::VectorXd::Zero(sh.num_params());
    case GaugeConvention::min_sp_error: {
      Polytope poly(G.transpose(), eps_clipped.values);
      Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
      for (int j = 1; j < sh.dim; ++j)
        c += G.col(prep_param_index(sh, j));
      return G.transpose() * poly.minimize(c);
    }
    case GaugeConvention::fixed_values: {
      // Solve for t so that the binary-pattern prep errors hit the given
      // constants. The system matrix M[w, w'] = 1[w subset of w'] is the
      // subset-inclusion (zeta) matrix, always invertible.
      Eigen::VectorXd kappa = Eigen::VectorXd::Zero(m);
      for (std::size_t i = 0;
           i < opts.fixed_constants.size() && i < static_cast<std::size_t>(m);
           ++i)
        kappa[static_cast<Eigen::Index>(i)] = opts.fixed_constants[i];
      Eigen::MatrixXd M(m, m);
      Eigen::VectorXd rhs(m);
      for (std::uint32_t w = 1; w <= static_cast<std::uint32_t>(m); ++w) {
        // basis index with digit 1 on every qudit in w
        std::vector<int> dg(sh.n, 0);
        for (int q = 0; q < sh.n; ++q)
          if ((w >> q) & 1u) dg[q] = 1;
        const int col = prep_param_index(sh, sh.index_of(dg));
        for (std::uint32_t wp = 1; wp <= static_cast<std::uint32_t>(m); ++wp)
          M(w - 1, wp - 1) = G(wp - 1, col);
        rhs[w - 1] = kappa[w - 1] - eps_clipped.values[col];
      }
      Eigen::VectorXd t = Eigen::FullPivLU<Eigen::MatrixXd>(M).solve(rhs);
      return G.transpose() * t;
    }
  }
  return Eigen::VectorXd::Zero(sh.num_params());
}

/** Clip a raw least-squares solution onto the positive orthant, first
 *  riding its gauge orbit toward feasibility when the negativity exceeds
 *  roundoff. The raw minimum-norm solution can sit structurally outside
 *  the orthant (its gauge component is zero, not its entries), in which
 *  case clipping it directly would leave the orbit of the data and
 *  overstate the ambiguity. Moving to the orbit point with the least
 *  remaining violation first means the final clip removes only mass that
 *  no gauge choice can repair (zero when the positivity region is
 *  non-empty, the shot-noise excess otherwise). Returns the clipped base
 *  point and that removed mass. */
inline std::pair<EpsilonVector, double> feasible_clipped(
    const SystemShape& sh, const Eigen::VectorXd& eps0) {
  Eigen::VectorXd shifted = eps0;
  if (eps0.minCoeff() < -1e-10) {
    const Eigen::MatrixXd Gt = gauge_generator_matrix(sh).transpose();
    Polytope orbit(Gt, eps0);
    shifted += Gt * orbit.least_violation_point();
  }
  EpsilonVector base(sh);
  double clip_total = 0.0;
  for (int i = 0; i < sh.num_params(); ++i) {
    base.values[i] = std::max(shifted[i], 0.0);
    clip_total += base.values[i] - shifted[i];
  }
  return {std::move(base), clip_total};
}

}  // namespace detail

/** Weighted least squares against explicit row targets; the core of
 *  estimate(). Row targets y and variances var are indexed like
 *  design.rows. Exposed so exact (infinite-shot) targets can be fed
 *  directly in tests and consistency checks. */
inline SpamEstimate estimate_from_targets(const DesignMatrix& design,
                                          const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& var,
                                          const EstimateOptions& opts = {}) {
  if (design.rank != design.expected_rank())
    throw RankDeficientDesign(
        "design rank " + std::to_string(design.rank) + " below required " +
        std::to_string(design.expected_rank()));
  const SystemShape& sh = design.shape;
  const Eigen::Index R = static_cast<Eigen::Index>(design.rows.size());
  if (y.size() != R || var.size() != R)
    throw InvalidConfig("row targets do not match design rows");

  // Weighted least squares via SVD pseudoinverse. The design rows are
  // orthogonal to every gauge generator, so the row space is exactly the
  // learnable subspace and the minimum-norm solution carries no gauge
  // component: this is the "project out the gauge span" solve.
  Eigen::MatrixXd B = design.dense();
  Eigen::VectorXd z(R);
  for (Eigen::Index r = 0; r < R; ++r) {
    const double sw = 1.0 / std::sqrt(var[r]);
    B.row(r) *= sw;
    z[r] = sw * y[r];
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(
      B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-9);
  Eigen::VectorXd eps0 = svd.solve(z);

  SpamEstimate est;
  est.convention = opts.convention;
  est.meta.design_id = design.id;
  est.meta.pre_clip = eps0;

  auto [base, clip_total] = detail::feasible_clipped(sh, eps0);
  est.meta.clip_total = clip_total;

  est.eps_hat = base;
  est.eps_hat.values += detail::convention_shift(base, opts);

  est.stderrs = Eigen::VectorXd::Zero(sh.num_params());
  if (opts.with_intervals) {
    // base lies on the gauge orbit of the data (up to the reported clip),
    // so coordinate ranges of its positivity region are the ambiguity
    // intervals; the clipped mass widens them as an honest slack.
    est.intervals = all_parameter_intervals(base);
    for (auto& iv : est.intervals) {
      iv.lower = std::max(0.0, iv.lower - clip_total);
      iv.upper += clip_total;
    }
  }
  return est;
}

/** Recompute the representative under another gauge convention from the
 *  stored pre-clip least-squares solution (used by reports that always
 *  mark the min-SP point regardless of the requested convention). */
inline EpsilonVector representative_under(const SpamEstimate& est,
                                          GaugeConvention conv) {
  if (conv == est.convention) return est.eps_hat;
  if (est.meta.pre_clip.size() != est.eps_hat.shape.num_params())
    throw InvalidConfig("estimate lacks pre-clip data for re-gauging");
  auto [base, clip_total] =
      detail::feasible_clipped(est.eps_hat.shape, est.meta.pre_clip);
  (void)clip_total;
  EstimateOptions o;
  o.convention = conv;
  base.values += detail::convention_shift(base, o);
  return base;
}

/** Estimate all learnable error parameters from shot counts and fix the
 *  requested gauge representative. */
inline SpamEstimate estimate(const std::vector<CountsRecord>& records,
                             const DesignMatrix& design,
                             const EstimateOptions& opts = {}) {
  if (records.empty()) throw EmptyCounts("no counts records supplied");
  if (records.size() != design.circuits.size())
    throw InvalidConfig("record count does not match design circuits");
  for (std::size_t c = 0; c < records.size(); ++c) {
    if (!(records[c].circuit == design.circuits[c]))
      throw InvalidConfig("record circuit differs from design circuit " +
                          std::to_string(c));
    if (records[c].shots < 1) throw InvalidConfig("record with no shots");
  }

  const Eigen::Index R = static_cast<Eigen::Index>(design.rows.size());
  Eigen::VectorXd y(R), var(R);
  for (Eigen::Index r = 0; r < R; ++r) {
    const DesignRow& row = design.rows[static_cast<std::size_t>(r)];
    const CountsRecord& rec = records[static_cast<std::size_t>(row.circuit_index)];
    const double N = static_cast<double>(rec.shots);
    const double p = static_cast<double>(rec.counts[static_cast<std::size_t>(
                         row.outcome)]) / N;
    y[r] = p;
    // binomial variance with a floor so empty cells keep finite weight
    var[r] = std::max(p * (1.0 - p), 0.25 / N) / N;
  }
  SpamEstimate est = estimate_from_targets(design, y, var, opts);
  est.meta.shots = records.front().shots;
  return est;
}

/** Parametric bootstrap standard errors of the representative: resample
 *  counts from the empirical frequencies B times with derived seeds,
 *  re-estimate under the same convention, return per-parameter standard
 *  deviations. Deterministic given seed and independent of evaluation
 *  order. */
inline Eigen::VectorXd bootstrap_errors(const std::vector<CountsRecord>& records,
                                        const DesignMatrix& design,
                                        const EstimateOptions& opts,
                                        int B, std::uint64_t seed) {
  if (B < 50) throw InvalidConfig("bootstrap needs B >= 50 replicas");
  if (records.empty()) throw EmptyCounts("no counts records supplied");
  EstimateOptions ropts = opts;
  ropts.with_intervals = false;  // replicas need the representative only

  std::vector<Eigen::VectorXd> freqs;
  freqs.reserve(records.size());
  for (const auto& rec : records) freqs.push_back(rec.frequencies());

  const int P = design.shape.num_params();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(P);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(P);
  std::vector<CountsRecord> replica = records;
  for (int b = 0; b < B; ++b) {
    for (std::size_t r = 0; r < records.size(); ++r) {
      SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(b),
                                 static_cast<std::uint64_t>(r)));
      replica[r].counts = multinomial(freqs[r], records[r].shots, rng);
    }
    Eigen::VectorXd rep = estimate(replica, design, ropts).eps_hat.values;
    // Welford accumulation
    Eigen::VectorXd delta = rep - mean;
    mean += delta / static_cast<double>(b + 1);
    m2 += delta.cwiseProduct(rep - mean);
  }
  return (m2 / static_cast<double>(B - 1)).cwiseSqrt();
}

// ---------------------------------------------------------------------------
// Qubit-subspace summary (d = 3 -> d = 2)
// ---------------------------------------------------------------------------

/** Index of the d=3 (or any d > 2) basis state with the same binary digit
 *  string as a d=2 index. */
inline int embed_binary_index(const SystemShape& from_d2,
                              const SystemShape& to, int idx2) {
  return to.index_of(from_d2.digits(idx2));
}

/** Restrict the representative, intervals and errors to the parameters
 *  whose digit strings stay inside {0,1}: the qubit-subspace summary of a
 *  qutrit characterization. The intervals remain the ones computed in the
 *  full d=3 gauge polytope, which is the entire point: the extra level's
 *  positivity constraints make them narrower than any d=2-only analysis
 *  of the same qubit parameters. */
inline SpamEstimate qubit_subspace_summary(const SpamEstimate& est) {
  if (est.eps_hat.shape.d != 3)
    throw WrongDimension("qubit-subspace summary needs a d=3 estimate");
  const SystemShape sh3 = est.eps_hat.shape;
  const SystemShape sh2(sh3.n, 2);

  SpamEstimate out;
  out.convention = est.convention;
  out.meta = est.meta;
  out.meta.design_id = est.meta.design_id + "/qubit_subspace";
  out.eps_hat = EpsilonVector(sh2);
  out.stderrs = Eigen::VectorXd::Zero(sh2.num_params());
  out.meta.pre_clip = Eigen::VectorXd::Zero(sh2.num_params());
  if (!est.intervals.empty())
    out.intervals.assign(static_cast<std::size_t>(sh2.num_params()), {});

  for (int i2 = 0; i2 < sh2.num_params(); ++i2) {
    ParamLabel lb2 = param_label(sh2, i2);
    ParamLabel lb3 =
        lb2.kind == ParamLabel::Kind::prep
            ? prep_label(embed_binary_index(sh2, sh3, lb2.j))
            : confusion_label(embed_binary_index(sh2, sh3, lb2.l),
                              embed_binary_index(sh2, sh3, lb2.k));
    const int i3 = param_index(sh3, lb3);
    out.eps_hat.values[i2] = est.eps_hat.values[i3];
    if (est.stderrs.size() > 0) out.stderrs[i2] = est.stderrs[i3];
    if (est.meta.pre_clip.size() > 0)
      out.meta.pre_clip[i2] = est.meta.pre_clip[i3];
    if (!est.intervals.empty())
      out.intervals[static_cast<std::size_t>(i2)] =
          est.intervals[static_cast<std::size_t>(i3)];
  }
  return out;
}

/** The same projection for a bare epsilon vector (used to map d=3 ground
 *  truth onto qubit-subspace labels in tests and reports). */
inline EpsilonVector qubit_subspace_epsilon(const EpsilonVector& eps3) {
  const SystemShape& sh3 = eps3.shape;
  const SystemShape sh2(sh3.n, 2);
  EpsilonVector out(sh2);
  for (int i2 = 0; i2 < sh2.num_params(); ++i2) {
    ParamLabel lb2 = param_label(sh2, i2);
    ParamLabel lb3 =
        lb2.kind == ParamLabel::Kind::prep
            ? prep_label(embed_binary_index(sh2, sh3, lb2.j))
            : confusion_label(embed_binary_index(sh2, sh3, lb2.l),
                              embed_binary_index(sh2, sh3, lb2.k));
    out.values[i2] = eps3.values[param_index(sh3, lb3)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::json estimate_to_json(const SpamEstimate& est) {
  const SystemShape& sh = est.eps_hat.shape;
  nlohmann::json j;
  j["schema"] = "qspam.estimate/1";
  j["n"] = sh.n;
  j["d"] = sh.d;
  j["gauge_convention"] = to_string(est.convention);
  j["design"] = est.meta.design_id;
  j["shots"] = est.meta.shots;
  j["heralded"] = est.meta.heralded;
  j["clip_total"] = est.meta.clip_total;
  nlohmann::json params = nlohmann::json::object();
  for (int i = 0; i < sh.num_params(); ++i) {
    const std::string key = param_label_string(sh, param_label(sh, i));
    nlohmann::json p;
    p["representative"] = est.eps_hat.values[i];
    if (!est.intervals.empty()) {
      p["lower"] = est.intervals[static_cast<std::size_t>(i)].lower;
      p["upper"] = est.intervals[static_cast<std::size_t>(i)].upper;
    }
    p["stderr"] = est.stderrs.size() > 0 ? est.stderrs[i] : 0.0;
    if (est.meta.pre_clip.size() > 0 && est.meta.pre_clip[i] < 0.0)
      p["pre_clip"] = est.meta.pre_clip[i];
    params[key] = p;
  }
  j["parameters"] = params;
  return j;
}

inline SpamEstimate estimate_from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("d") || !j.contains("parameters"))
    throw InvalidConfig("estimate JSON lacks n/d/parameters");
  SystemShape sh(j.at("n").get<int>(), j.at("d").get<int>());
  SpamEstimate est;
  est.eps_hat = EpsilonVector(sh);
  est.convention = gauge_convention_from_string(
      j.value("gauge_convention", std::string("min_sp_error")));
  est.meta.design_id = j.value("design", std::string());
  est.meta.shots = j.value("shots", std::int64_t{0});
  est.meta.heralded = j.value("heralded", false);
  est.meta.clip_total = j.value("clip_total", 0.0);
  est.stderrs = Eigen::VectorXd::Zero(sh.num_params());
  est.intervals.assign(static_cast<std::size_t>(sh.num_params()), {});
  const auto& params = j.at("parameters");
  for (int i = 0; i < sh.num_params(); ++i) {
    const std::string key = param_label_string(sh, param_label(sh, i));
    if (!params.contains(key))
      throw InvalidConfig("estimate JSON lacks parameter " + key);
    const auto& p = params.at(key);
    est.eps_hat.values[i] = p.at("representative").get<double>();
    est.stderrs[i] = p.value("stderr", 0.0);
    auto& iv = est.intervals[static_cast<std::size_t>(i)];
    iv.lower = p.value("lower", est.eps_hat.values[i]);
    iv.upper = p.value("upper", est.eps_hat.values[i]);
  }
  return est;
}

inline SpamEstimate load_estimate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open estimate file: " + path);
  nlohmann::json j;
  in >> j;
  return estimate_from_json(j);
}

}  // namespace qspam
