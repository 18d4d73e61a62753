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
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qspam/errors.hpp"
#include "qspam/estimate.hpp"
#include "qspam/model.hpp"
#include "qspam/rng.hpp"

namespace qspam {

// ---------------------------------------------------------------------------
// Pauli labels
// ---------------------------------------------------------------------------

/** n-qubit Pauli label in symplectic (x, z) form. Bit q of each word is
 *  qubit q; qubit 0 is the leftmost letter of the string rendering. */
struct PauliLabel {
  int n = 2;
  std::uint32_t x = 0;
  std::uint32_t z = 0;

  std::uint32_t support() const { return x | z; }
  bool is_identity() const { return (x | z) == 0; }

  bool operator==(const PauliLabel& o) const {
    return n == o.n && x == o.x && z == o.z;
  }
  bool operator<(const PauliLabel& o) const { return code() < o.code(); }

  /** Base-4 integer code with digit order I < X < Y < Z and qubit 0 most
   *  significant; matches lexicographic order of the string rendering. */
  int code() const {
    int c = 0;
    for (int q = 0; q < n; ++q) {
      int xq = (x >> q) & 1u;
      int zq = (z >> q) & 1u;
      int letter = xq ? (zq ? 2 : 1) : (zq ? 3 : 0);
      c = c * 4 + letter;
    }
    return c;
  }

  std::string to_string() const {
    static const char kLetters[4] = {'I', 'X', 'Y', 'Z'};
    std::string s(n, 'I');
    for (int q = 0; q < n; ++q) {
      int xq = (x >> q) & 1u;
      int zq = (z >> q) & 1u;
      s[q] = kLetters[xq ? (zq ? 2 : 1) : (zq ? 3 : 0)];
    }
    return s;
  }
};

inline PauliLabel pauli_from_code(int n, int code) {
  PauliLabel p;
  p.n = n;
  for (int q = n - 1; q >= 0; --q) {
    int letter = code % 4;
    code /= 4;
    if (letter == 1 || letter == 2) p.x |= (1u << q);
    if (letter == 2 || letter == 3) p.z |= (1u << q);
  }
  return p;
}

inline PauliLabel pauli_from_string(const std::string& s) {
  PauliLabel p;
  p.n = static_cast<int>(s.size());
  if (p.n < 1) throw IndexOutOfRange("empty Pauli label");
  for (int q = 0; q < p.n; ++q) {
    switch (s[q]) {
      case 'I': break;
      case 'X': p.x |= (1u << q); break;
      case 'Y': p.x |= (1u << q); p.z |= (1u << q); break;
      case 'Z': p.z |= (1u << q); break;
      default: throw IndexOutOfRange("bad Pauli letter in " + s);
    }
  }
  return p;
}

/** All 4^n labels in code order; identity first. */
inline std::vector<PauliLabel> all_pauli_labels(int n,
                                                bool include_identity = true) {
  std::vector<PauliLabel> out;
  const int total = 1 << (2 * n);
  for (int c = include_identity ? 0 : 1; c < total; ++c)
    out.push_back(pauli_from_code(n, c));
  return out;
}

// ---------------------------------------------------------------------------
// Pauli channels
// ---------------------------------------------------------------------------

/** Symplectic form: P_a and P_b commute iff this is 0. */
inline int symplectic_form(const PauliLabel& a, const PauliLabel& b) {
  return (std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) & 1;
}

/** Pauli channel given by its eigenvalues lambda indexed by label code.
 *  Valid channels have lambda_I = 1 and Walsh-dual error rates >= 0. */
struct PauliChannel {
  int n = 2;
  Eigen::VectorXd lambda;  // size 4^n, by label code

  double value(const PauliLabel& a) const { return lambda[a.code()]; }
};

/** Walsh transform: error rates from eigenvalues. */
inline Eigen::VectorXd rates_from_eigenvalues(const PauliChannel& ch) {
  const int T = 1 << (2 * ch.n);
  auto labels = all_pauli_labels(ch.n);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(T);
  for (int a = 0; a < T; ++a) {
    double acc = 0.0;
    for (int b = 0; b < T; ++b) {
      int sgn = symplectic_form(labels[static_cast<std::size_t>(a)],
                                labels[static_cast<std::size_t>(b)]);
      acc += (sgn ? -1.0 : 1.0) * ch.lambda[b];
    }
    p[a] = acc / static_cast<double>(T);
  }
  return p;
}

/** Inverse Walsh transform: eigenvalues from error rates. */
inline PauliChannel channel_from_rates(int n, const Eigen::VectorXd& rates) {
  const int T = 1 << (2 * n);
  if (rates.size() != T) throw InvalidConfig("rate vector has wrong length");
  auto labels = all_pauli_labels(n);
  PauliChannel ch;
  ch.n = n;
  ch.lambda = Eigen::VectorXd::Zero(T);
  for (int b = 0; b < T; ++b) {
    double acc = 0.0;
    for (int a = 0; a < T; ++a) {
      int sgn = symplectic_form(labels[static_cast<std::size_t>(a)],
                                labels[static_cast<std::size_t>(b)]);
      acc += (sgn ? -1.0 : 1.0) * rates[a];
    }
    ch.lambda[b] = acc;
  }
  return ch;
}

/** Validates lambda_I = 1 and rate positivity (to 1e-12). */
inline PauliChannel channel_from_eigenvalues(int n,
                                             const Eigen::VectorXd& lambda) {
  PauliChannel ch;
  ch.n = n;
  ch.lambda = lambda;
  if (lambda.size() != (1 << (2 * n)))
    throw InvalidConfig("eigenvalue vector has wrong length");
  if (std::abs(lambda[0] - 1.0) > 1e-12)
    throw InvalidConfig("Pauli channel needs lambda_I = 1");
  Eigen::VectorXd p = rates_from_eigenvalues(ch);
  if (p.minCoeff() < -1e-12)
    throw InvalidConfig("eigenvalues are not completely positive");
  return ch;
}

/** Random channel with error rates summing to `total_error`. */
inline PauliChannel random_pauli_channel(int n, double total_error,
                                         std::uint64_t seed) {
  const int T = 1 << (2 * n);
  SplitMix64 rng(seed);
  Eigen::VectorXd p(T);
  double s = 0.0;
  p[0] = 0.0;
  for (int a = 1; a < T; ++a) {
    p[a] = rng.uniform();
    s += p[a];
  }
  for (int a = 1; a < T; ++a) p[a] *= total_error / s;
  p[0] = 1.0 - total_error;
  return channel_from_rates(n, p);
}

// ---------------------------------------------------------------------------
// CZ conjugation
// ---------------------------------------------------------------------------

/** Conjugation of a two-qubit Pauli by the CZ gate: CZ P_a CZ = sign P_b.
 *  Symplectic update: each qubit's z bit flips by the other qubit's x
 *  bit; the sign is -1 exactly when both x bits are set and the z bits
 *  differ. */
inline std::pair<PauliLabel, int> cz_action(const PauliLabel& a) {
  if (a.n != 2) throw WrongDimension("cz_action is a two-qubit rule");
  const std::uint32_t x0 = a.x & 1u, x1 = (a.x >> 1) & 1u;
  const std::uint32_t z0 = a.z & 1u, z1 = (a.z >> 1) & 1u;
  PauliLabel b = a;
  b.z = (z0 ^ x1) | ((z1 ^ x0) << 1);
  int sign = (x0 && x1 && (z0 ^ z1)) ? -1 : +1;
  return {b, sign};
}

using CliffordAction = std::function<std::pair<PauliLabel, int>(const PauliLabel&)>;

/** A Pauli eigenvalue is identifiable from intercept benchmarking iff the
 *  ideal gate preserves the label's support. */
inline bool is_identifiable(const PauliLabel& a, const CliffordAction& action) {
  return action(a).first.support() == a.support();
}

// ---------------------------------------------------------------------------
// Support-indexed SPAM factors
// ---------------------------------------------------------------------------

/** Symmetrized SPAM noise: state-preparation and measurement Pauli
 *  fidelities that depend only on the support of the label. Indexed by
 *  support bitmask; entry 0 is 1. */
struct SpamFactors {
  int n = 2;
  std::vector<double> lam_s;  // size 2^n
  std::vector<double> lam_m;  // size 2^n
};

/** Z-type expectation of the preparation over a support mask:
 *  sum_j (-1)^{|pattern(j) & mask|} c_j. */
inline double prep_z_expectation(const SpamModel& m, std::uint32_t mask) {
  if (m.shape.d != 2)
    throw WrongDimension("Pauli SPAM factors need a d=2 model");
  double acc = 0.0;
  for (int j = 0; j < m.shape.dim; ++j) {
    int par = std::popcount(m.shape.pattern(j) & mask) & 1;
    acc += (par ? -1.0 : 1.0) * m.prep[j];
  }
  return acc;
}

/** Z-type measurement fidelity over a support mask:
 *  2^{-n} sum_{l,k} (-1)^{|pattern(l) & mask| + |pattern(k) & mask|} s_{l,k}. */
inline double meas_z_expectation(const SpamModel& m, std::uint32_t mask) {
  if (m.shape.d != 2)
    throw WrongDimension("Pauli SPAM factors need a d=2 model");
  double acc = 0.0;
  for (int l = 0; l < m.shape.dim; ++l) {
    int pl = std::popcount(m.shape.pattern(l) & mask) & 1;
    for (int k = 0; k < m.shape.dim; ++k) {
      int pk = std::popcount(m.shape.pattern(k) & mask) & 1;
      acc += ((pl ^ pk) ? -1.0 : 1.0) * m.confusion(l, k);
    }
  }
  return acc / static_cast<double>(m.shape.dim);
}

/** Truth-side factors from a two-level SPAM model. */
inline SpamFactors spam_factors_from_model(const SpamModel& m) {
  SpamFactors f;
  f.n = m.shape.n;
  const int S = 1 << f.n;
  f.lam_s.assign(S, 1.0);
  f.lam_m.assign(S, 1.0);
  for (int mask = 1; mask < S; ++mask) {
    f.lam_s[mask] = prep_z_expectation(m, static_cast<std::uint32_t>(mask));
    f.lam_m[mask] = meas_z_expectation(m, static_cast<std::uint32_t>(mask));
  }
  return f;
}

/** The same factors as affine functions of qubit-subspace error
 *  parameters:
 *    lam_s(mask) = 1 - 2 sum {eps_S(j) : |pattern(j) & mask| odd}
 *    lam_m(mask) = 1 - 2^{1-n} sum {eps_M(l,k) : |disagree(l,k) & mask| odd}
 *  Evaluating them on per-label interval endpoints propagates the gauge
 *  ambiguity of an estimate into a factor interval. */
inline SpamFactors spam_factors_from_epsilon(const EpsilonVector& eps) {
  if (eps.shape.d != 2)
    throw WrongDimension("Pauli SPAM factors need d=2 parameters");
  return spam_factors_from_model(from_epsilon(eps, 1.0));
}

/** SPAM factor of one label pair with uncertainty, from an estimate. */
struct FactorBound {
  double value = 1.0;  // at the gauge representative
  double lower = 1.0;
  double upper = 1.0;
  double stderr_ = 0.0;
};

/** lambda^S_a * lambda^M_{G(a)} from a d=2 SPAM estimate. The value is
 *  taken at the gauge representative; interval endpoints of every
 *  involved parameter propagate through the affine factor formulas
 *  (conservative: joint feasibility across labels is not re-imposed);
 *  stderr is first-order propagation of the per-label errors. */
inline FactorBound spam_pauli_factor(const SpamEstimate& est,
                                     const PauliLabel& a,
                                     const PauliLabel& ga) {
  const SystemShape& sh = est.eps_hat.shape;
  if (sh.d != 2) throw WrongDimension("spam_pauli_factor needs d=2 labels");
  if (sh.n != a.n) throw WrongDimension("label size does not match estimate");
  const std::uint32_t ms = a.support();
  const std::uint32_t mm = ga.support();

  // affine parts: lam = const - sum coeff_i * eps_i over odd-parity labels
  double s_sum = 0.0, s_lo = 0.0, s_hi = 0.0, s_var = 0.0;
  double m_sum = 0.0, m_lo = 0.0, m_hi = 0.0, m_var = 0.0;
  const double cs = 2.0;
  const double cm = std::pow(2.0, 1 - sh.n);
  for (int i = 0; i < sh.num_params(); ++i) {
    ParamLabel lb = param_label(sh, i);
    const bool have_iv = !est.intervals.empty();
    const double rep = est.eps_hat.values[i];
    const double lo = have_iv ? est.intervals[static_cast<std::size_t>(i)].lower : rep;
    const double hi = have_iv ? est.intervals[static_cast<std::size_t>(i)].upper : rep;
    const double se = est.stderrs.size() > 0 ? est.stderrs[i] : 0.0;
    if (lb.kind == ParamLabel::Kind::prep) {
      if (std::popcount(sh.pattern(lb.j) & ms) & 1) {
        s_sum += rep;
        s_lo += lo;
        s_hi += hi;
        s_var += se * se;
      }
    } else {
      if (std::popcount(sh.disagree_mask(lb.l, lb.k) & mm) & 1) {
        m_sum += rep;
        m_lo += lo;
        m_hi += hi;
        m_var += se * se;
      }
    }
  }
  const double sv = 1.0 - cs * s_sum;
  const double s_up = 1.0 - cs * s_lo, s_dn = 1.0 - cs * s_hi;
  const double mv = 1.0 - cm * m_sum;
  const double m_up = 1.0 - cm * m_lo, m_dn = 1.0 - cm * m_hi;

  FactorBound out;
  out.value = sv * mv;
  out.lower = s_dn * m_dn;
  out.upper = s_up * m_up;
  // first-order error propagation, treating per-label errors as independent
  out.stderr_ = std::sqrt(cs * cs * s_var * mv * mv + cm * cm * m_var * sv * sv);
  return out;
}

/** Truth-side factor product for a label pair. */
inline double spam_pauli_factor(const SpamFactors& f, const PauliLabel& a,
                                const PauliLabel& ga) {
  return f.lam_s[a.support()] * f.lam_m[ga.support()];
}

// ---------------------------------------------------------------------------
// Intercept cycle benchmarking
// ---------------------------------------------------------------------------

/** Fidelity decay samples for one label. */
struct DecayRecord {
  PauliLabel a;
  std::vector<int> depths;
  Eigen::VectorXd F;        // estimated expectation of the evolved Pauli
  Eigen::VectorXd stderrs;  // per-point standard error
  std::int64_t shots = 0;
};

struct CbTruth {
  SpamFactors spam;
  PauliChannel channel;
  CliffordAction action = [](const PauliLabel& a) { return cz_action(a); };
};

/** Noise-free decay value: after 2t+1 alternations of the Pauli noise and
 *  the ideal gate starting from an eigenstate of P_a and measuring the
 *  conjugated operator (sign included),
 *    F_a(t) = lam^S_a lam^M_{G(a)} lambda_a (lambda_a lambda_{G(a)})^t.
 *  The conjugation signs cancel in pairs because the measured operator
 *  carries the same sign as the evolved one; the transfer-matrix oracle
 *  in the test suite pins this convention. */
inline double exact_cb_value(const CbTruth& truth, const PauliLabel& a,
                             int t) {
  auto [ga, sign] = truth.action(a);
  (void)sign;
  const double la = truth.channel.value(a);
  const double lg = truth.channel.value(ga);
  return truth.spam.lam_s[a.support()] * truth.spam.lam_m[ga.support()] * la *
         std::pow(la * lg, t);
}

/** Simulate the decay experiment: binomial noise on the +/-1 observable
 *  at each depth, derived per-depth seeds. */
inline DecayRecord simulate_cb(const CbTruth& truth, const PauliLabel& a,
                               const std::vector<int>& depths,
                               std::int64_t shots, std::uint64_t seed) {
  if (a.is_identity()) throw InvalidConfig("decay label must not be identity");
  if (shots < 1) throw InvalidConfig("shots must be >= 1");
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (depths[i] <= depths[i - 1])
      throw InvalidConfig("depths must be strictly increasing");
  DecayRecord rec;
  rec.a = a;
  rec.depths = depths;
  rec.shots = shots;
  rec.F = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(depths.size()));
  rec.stderrs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(depths.size()));
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const double f = exact_cb_value(truth, a, depths[i]);
    const double p_up = 0.5 * (1.0 + f);
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(depths[i])));
    std::int64_t up = 0;
    for (std::int64_t s = 0; s < shots; ++s)
      if (rng.uniform() < p_up) ++up;
    const double fhat =
        2.0 * static_cast<double>(up) / static_cast<double>(shots) - 1.0;
    rec.F[static_cast<Eigen::Index>(i)] = fhat;
    rec.stderrs[static_cast<Eigen::Index>(i)] = std::sqrt(
        std::max(1.0 - fhat * fhat, 1.0 / static_cast<double>(shots)) /
        static_cast<double>(shots));
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Exponential fitting
// ---------------------------------------------------------------------------

struct ExponentialFit {
  double intercept = 1.0;
  double rate = 1.0;
  double var_log_intercept = 0.0;
  double var_log_rate = 0.0;
  double cov_log = 0.0;
  int used_points = 0;
};

/** Weighted log-linear least squares: log F = log(intercept) + t log(rate).
 *  Points with F <= 0 are dropped (high-depth noise can cross zero); fewer
 *  than 3 surviving points raises NonPositiveData. Weights are inverse
 *  variances of log F; exact (zero-error) inputs fall back to uniform
 *  weights and are recovered to machine precision. */
inline ExponentialFit fit_exponential(const DecayRecord& rec) {
  if (rec.depths.size() < 3)
    throw NonPositiveData("need at least 3 depths to fit a decay");
  std::vector<double> t, y, v;
  for (std::size_t i = 0; i < rec.depths.size(); ++i) {
    const double f = rec.F[static_cast<Eigen::Index>(i)];
    if (f <= 0.0) continue;
    const double se = rec.stderrs[static_cast<Eigen::Index>(i)];
    t.push_back(static_cast<double>(rec.depths[i]));
    y.push_back(std::log(f));
    v.push_back((se * se) / (f * f));
  }
  if (t.size() < 3)
    throw NonPositiveData("fewer than 3 positive decay points remain");
  double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = 1.0 / std::max(v[i], 1e-24);
    S += w;
    Sx += w * t[i];
    Sy += w * y[i];
    Sxx += w * t[i] * t[i];
    Sxy += w * t[i] * y[i];
  }
  const double Delta = S * Sxx - Sx * Sx;
  const double log_icept = (Sxx * Sy - Sx * Sxy) / Delta;
  const double log_rate = (S * Sxy - Sx * Sy) / Delta;
  ExponentialFit fit;
  fit.intercept = std::exp(log_icept);
  fit.rate = std::exp(log_rate);
  fit.var_log_intercept = Sxx / Delta;
  fit.var_log_rate = S / Delta;
  fit.cov_log = -Sx / Delta;
  fit.used_points = static_cast<int>(t.size());
  return fit;
}

// ---------------------------------------------------------------------------
// SPAM-corrected eigenvalue bounds
// ---------------------------------------------------------------------------

struct EigenvalueBound {
  PauliLabel a;
  bool identifiable = false;
  double point = 1.0;   // intercept / factor at the representative
  double lower = 1.0;
  double upper = 1.0;
  double stderr_ = 0.0;
};

/** Divide the fitted intercept by the SPAM factor. Identifiable labels
 *  (support preserved by the gate) have a learnable factor: the bound is
 *  a point estimate +/- one standard error. Non-identifiable labels carry
 *  the factor's gauge interval into [intercept/upper, intercept/lower],
 *  widened by one standard error on each side. */
inline EigenvalueBound corrected_eigenvalue(
    const DecayRecord& rec, const SpamEstimate& est, const PauliLabel& a,
    const CliffordAction& action = [](const PauliLabel& x) {
      return cz_action(x);
    }) {
  const ExponentialFit fit = fit_exponential(rec);
  auto [ga, sign] = action(a);
  (void)sign;
  const FactorBound factor = spam_pauli_factor(est, a, ga);
  if (factor.lower <= 0.5)
    throw DivisionUnstable("SPAM factor interval reaches 0.5 or below");

  const double icept = fit.intercept;
  const double sl_a = std::sqrt(fit.var_log_intercept);

  EigenvalueBound out;
  out.a = a;
  out.identifiable = ga.support() == a.support();
  out.point = icept / factor.value;
  out.stderr_ = out.point * std::sqrt(sl_a * sl_a +
                                      (factor.stderr_ / factor.value) *
                                          (factor.stderr_ / factor.value));
  if (out.identifiable) {
    out.lower = out.point - out.stderr_;
    out.upper = out.point + out.stderr_;
  } else {
    const double lo_pt = icept / factor.upper;
    const double hi_pt = icept / factor.lower;
    const double se_lo = lo_pt * std::sqrt(sl_a * sl_a +
                                           (factor.stderr_ / factor.upper) *
                                               (factor.stderr_ / factor.upper));
    const double se_hi = hi_pt * std::sqrt(sl_a * sl_a +
                                           (factor.stderr_ / factor.lower) *
                                               (factor.stderr_ / factor.lower));
    out.lower = lo_pt - se_lo;
    out.upper = hi_pt + se_hi;
  }
  return out;
}

/** Decay-only estimate of sqrt(lambda_a lambda_{G(a)}) from the fitted
 *  rate of the first record (the model gives both records the same rate).
 *  SPAM factors cancel entirely: no characterization input is needed. */
struct CerEstimate {
  double value = 1.0;
  double stderr_ = 0.0;
  double rate_a = 1.0;
  double rate_ga = 1.0;
};

inline CerEstimate cer_combination(const DecayRecord& rec_a,
                                   const DecayRecord& rec_ga) {
  const ExponentialFit fa = fit_exponential(rec_a);
  const ExponentialFit fg = fit_exponential(rec_ga);
  CerEstimate out;
  out.rate_a = fa.rate;
  out.rate_ga = fg.rate;
  out.value = std::sqrt(fa.rate);
  out.stderr_ = 0.5 * out.value * std::sqrt(fa.var_log_rate);
  return out;
}

/** Mean eigenvalue over all 16 labels (identity included as 1). Interval
 *  endpoints add per label; stderrs add in quadrature. */
struct FidelityInterval {
  double point = 1.0;
  double lower = 1.0;
  double upper = 1.0;
  double stderr_ = 0.0;
};

inline FidelityInterval average_fidelity(
    const std::vector<EigenvalueBound>& bounds) {
  if (bounds.empty()) throw IncompleteSet("no eigenvalue bounds given");
  const int n = bounds.front().a.n;
  const int want = (1 << (2 * n)) - 1;
  std::set<int> seen;
  double sp = 1.0, slo = 1.0, shi = 1.0, svar = 0.0;
  for (const auto& b : bounds) {
    if (b.a.is_identity()) continue;
    seen.insert(b.a.code());
    sp += b.point;
    slo += b.lower;
    shi += b.upper;
    svar += b.stderr_ * b.stderr_;
  }
  if (static_cast<int>(seen.size()) != want)
    throw IncompleteSet("bounds must cover all non-identity labels");
  const double T = static_cast<double>(want + 1);
  return {sp / T, slo / T, shi / T, std::sqrt(svar) / T};
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::json decay_to_json(const DecayRecord& rec) {
  nlohmann::json j;
  j["schema"] = "qspam.decay/1";
  j["label"] = rec.a.to_string();
  j["depths"] = rec.depths;
  j["F"] = std::vector<double>(rec.F.data(), rec.F.data() + rec.F.size());
  j["stderr"] = std::vector<double>(rec.stderrs.data(),
                                    rec.stderrs.data() + rec.stderrs.size());
  j["shots"] = rec.shots;
  return j;
}

inline DecayRecord decay_from_json(const nlohmann::json& j) {
  DecayRecord rec;
  rec.a = pauli_from_string(j.at("label").get<std::string>());
  rec.depths = j.at("depths").get<std::vector<int>>();
  auto f = j.at("F").get<std::vector<double>>();
  auto se = j.at("stderr").get<std::vector<double>>();
  if (f.size() != rec.depths.size() || se.size() != rec.depths.size())
    throw InvalidConfig("decay JSON arrays have mismatched lengths");
  rec.shots = j.at("shots").get<std::int64_t>();
  rec.F = Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  rec.stderrs =
      Eigen::Map<Eigen::VectorXd>(se.data(), static_cast<Eigen::Index>(se.size()));
  return rec;
}

}  // namespace qspam
