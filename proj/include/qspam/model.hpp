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
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspam/errors.hpp"
#include "qspam/rng.hpp"
#include "qspam/shape.hpp"

namespace qspam {

/** Tolerance for models built in memory from exact arithmetic. */
inline constexpr double kConstructTol = 1e-12;
/** Tolerance for models loaded from files (decimal round trips). */
inline constexpr double kFileTol = 1e-9;

// ---------------------------------------------------------------------------
// Error-parameter labels
//
// The incoherent SPAM model of an n-qudit register has d^n * d^n - 1 free
// parameters: preparation errors eps_S(j) = Pr(prepare j | target 0) for
// j != 0, and readout confusions eps_M(l,k) = Pr(read l | true k) for
// l != k. The canonical flat order is all S labels by ascending j, then
// all M labels lexicographic in (l, k).
// ---------------------------------------------------------------------------

struct ParamLabel {
  enum class Kind { prep, confusion };
  Kind kind = Kind::prep;
  int j = 0;  // prep: basis index prepared instead of 0
  int l = 0;  // confusion: outcome read
  int k = 0;  // confusion: true state

  bool operator==(const ParamLabel& o) const {
    return kind == o.kind && j == o.j && l == o.l && k == o.k;
  }
};

inline ParamLabel prep_label(int j) {
  ParamLabel lb;
  lb.kind = ParamLabel::Kind::prep;
  lb.j = j;
  return lb;
}

inline ParamLabel confusion_label(int l, int k) {
  ParamLabel lb;
  lb.kind = ParamLabel::Kind::confusion;
  lb.l = l;
  lb.k = k;
  return lb;
}

/** Flat index of a prep label j (1 <= j < dim). */
inline int prep_param_index(const SystemShape& shape, int j) {
  if (j < 1 || j >= shape.dim) throw IndexOutOfRange("prep label j out of range");
  return j - 1;
}

/** Flat index of a confusion label (l, k), l != k. */
inline int confusion_param_index(const SystemShape& shape, int l, int k) {
  if (l < 0 || l >= shape.dim || k < 0 || k >= shape.dim || l == k)
    throw IndexOutOfRange("confusion label (l,k) out of range");
  return (shape.dim - 1) + l * (shape.dim - 1) + (k > l ? k - 1 : k);
}

inline int param_index(const SystemShape& shape, const ParamLabel& lb) {
  return lb.kind == ParamLabel::Kind::prep
             ? prep_param_index(shape, lb.j)
             : confusion_param_index(shape, lb.l, lb.k);
}

inline ParamLabel param_label(const SystemShape& shape, int index) {
  const int D = shape.dim;
  if (index < 0 || index >= shape.num_params())
    throw IndexOutOfRange("parameter index out of range");
  if (index < D - 1) return prep_label(index + 1);
  int m = index - (D - 1);
  int l = m / (D - 1);
  int r = m % (D - 1);
  int k = (r >= l) ? r + 1 : r;
  return confusion_label(l, k);
}

/** Render a parameter label, e.g. "S_01" or "M_01_20" (digit strings). */
inline std::string param_label_string(const SystemShape& shape,
                                      const ParamLabel& lb) {
  if (lb.kind == ParamLabel::Kind::prep) return "S_" + shape.basis_label(lb.j);
  return "M_" + shape.basis_label(lb.l) + "_" + shape.basis_label(lb.k);
}

inline ParamLabel parse_param_label(const SystemShape& shape,
                                    const std::string& s) {
  if (s.size() >= 3 && s[0] == 'S' && s[1] == '_')
    return prep_label(shape.parse_basis_label(s.substr(2)));
  if (s.size() >= 5 && s[0] == 'M' && s[1] == '_') {
    auto sep = s.find('_', 2);
    if (sep != std::string::npos)
      return confusion_label(shape.parse_basis_label(s.substr(2, sep - 2)),
                             shape.parse_basis_label(s.substr(sep + 1)));
  }
  throw IndexOutOfRange("malformed parameter label: " + s);
}

/** Flat vector of all d^2n - 1 error parameters in canonical order. */
struct EpsilonVector {
  SystemShape shape;
  Eigen::VectorXd values;

  EpsilonVector() = default;
  explicit EpsilonVector(const SystemShape& sh)
      : shape(sh), values(Eigen::VectorXd::Zero(sh.num_params())) {}

  double& prep(int j) { return values[prep_param_index(shape, j)]; }
  double prep(int j) const { return values[prep_param_index(shape, j)]; }
  double& confusion(int l, int k) {
    return values[confusion_param_index(shape, l, k)];
  }
  double confusion(int l, int k) const {
    return values[confusion_param_index(shape, l, k)];
  }
};

// ---------------------------------------------------------------------------
// SPAM model
// ---------------------------------------------------------------------------

/** Incoherent SPAM model: a preparation distribution over basis states and
 *  a column-stochastic readout confusion matrix.
 *
 *  confusion(l, k) = Pr(read l | true state k); columns sum to 1.
 *  prep(j) = Pr(prepared j | target 0); sums to 1.
 */
struct SpamModel {
  SystemShape shape;
  Eigen::VectorXd prep;
  Eigen::MatrixXd confusion;

  SpamModel() = default;
  explicit SpamModel(const SystemShape& sh)
      : shape(sh),
        prep(Eigen::VectorXd::Zero(sh.dim)),
        confusion(Eigen::MatrixXd::Identity(sh.dim, sh.dim)) {
    prep[0] = 1.0;
  }
};

/** Check positivity and normalization; throws NormalizationViolation. */
inline void validate(const SpamModel& m, double tol = kConstructTol) {
  const int D = m.shape.dim;
  if (m.prep.size() != D || m.confusion.rows() != D || m.confusion.cols() != D)
    throw NormalizationViolation("model arrays have wrong dimensions");
  if (m.prep.minCoeff() < -tol)
    throw NormalizationViolation("negative preparation probability");
  if (std::abs(m.prep.sum() - 1.0) > tol)
    throw NormalizationViolation("preparation distribution does not sum to 1");
  if (m.confusion.minCoeff() < -tol)
    throw NormalizationViolation("negative confusion entry");
  for (int k = 0; k < D; ++k) {
    if (std::abs(m.confusion.col(k).sum() - 1.0) > tol)
      throw NormalizationViolation("confusion column " + std::to_string(k) +
                                   " does not sum to 1");
  }
}

/** Build the model with the given off-diagonal errors; diagonals are fixed
 *  by normalization. */
inline SpamModel from_epsilon(const EpsilonVector& eps,
                              double tol = kConstructTol) {
  const SystemShape& sh = eps.shape;
  SpamModel m(sh);
  double s = 0.0;
  for (int j = 1; j < sh.dim; ++j) {
    m.prep[j] = eps.prep(j);
    s += eps.prep(j);
  }
  m.prep[0] = 1.0 - s;
  for (int k = 0; k < sh.dim; ++k) {
    double col = 0.0;
    for (int l = 0; l < sh.dim; ++l) {
      if (l == k) continue;
      m.confusion(l, k) = eps.confusion(l, k);
      col += eps.confusion(l, k);
    }
    m.confusion(k, k) = 1.0 - col;
  }
  validate(m, tol);
  return m;
}

/** Read off the off-diagonal errors of a model. */
inline EpsilonVector to_epsilon(const SpamModel& m) {
  EpsilonVector eps(m.shape);
  for (int j = 1; j < m.shape.dim; ++j) eps.prep(j) = m.prep[j];
  for (int l = 0; l < m.shape.dim; ++l)
    for (int k = 0; k < m.shape.dim; ++k)
      if (l != k) eps.confusion(l, k) = m.confusion(l, k);
  return eps;
}

/** Post-selected preparation: condition the prep distribution on an
 *  immediate readout of outcome 0.
 *
 *  prep'(j) = confusion(0, j) prep(j) / sum_i confusion(0, i) prep(i).
 *  The confusion matrix is unchanged. Throws HeraldImpossible when the
 *  acceptance probability is zero.
 */
inline SpamModel herald(const SpamModel& m) {
  SpamModel out = m;
  double norm = 0.0;
  for (int i = 0; i < m.shape.dim; ++i)
    norm += m.confusion(0, i) * m.prep[i];
  if (norm <= 0.0)
    throw HeraldImpossible("herald acceptance probability is zero");
  for (int j = 0; j < m.shape.dim; ++j)
    out.prep[j] = m.confusion(0, j) * m.prep[j] / norm;
  return out;
}

/** Herald acceptance probability (fraction of shots kept). */
inline double herald_acceptance(const SpamModel& m) {
  double norm = 0.0;
  for (int i = 0; i < m.shape.dim; ++i)
    norm += m.confusion(0, i) * m.prep[i];
  return norm;
}

/** Random model with every error parameter uniform in [0, eps_scale].
 *
 *  Parameters are drawn in canonical label order from SplitMix64(seed),
 *  so a (shape, eps_scale, seed) triple pins the model exactly on every
 *  platform. eps_scale = 0 gives the identity model.
 */
inline SpamModel random_model(const SystemShape& shape, double eps_scale,
                              std::uint64_t seed) {
  if (eps_scale < 0.0 || eps_scale > 0.1)
    throw ScaleTooLarge("eps_scale must lie in [0, 0.1]");
  if (eps_scale * (shape.dim - 1) >= 1.0)
    throw ScaleTooLarge("eps_scale * (d^n - 1) >= 1 breaks normalization");
  SplitMix64 rng(seed);
  EpsilonVector eps(shape);
  for (int i = 0; i < shape.num_params(); ++i)
    eps.values[i] = eps_scale * rng.uniform();
  return from_epsilon(eps);
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::json model_to_json(const SpamModel& m) {
  nlohmann::json j;
  j["schema"] = "qspam.model/1";
  j["n"] = m.shape.n;
  j["d"] = m.shape.d;
  j["prep"] = std::vector<double>(m.prep.data(), m.prep.data() + m.prep.size());
  nlohmann::json rows = nlohmann::json::array();
  for (int l = 0; l < m.shape.dim; ++l) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < m.shape.dim; ++k) row.push_back(m.confusion(l, k));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  return j;
}

inline SpamModel model_from_json(const nlohmann::json& j,
                                 double tol = kFileTol) {
  if (!j.contains("n") || !j.contains("d") || !j.contains("prep") ||
      !j.contains("confusion"))
    throw InvalidConfig("model JSON lacks n/d/prep/confusion");
  SystemShape sh(j.at("n").get<int>(), j.at("d").get<int>());
  SpamModel m(sh);
  auto prep = j.at("prep").get<std::vector<double>>();
  if (static_cast<int>(prep.size()) != sh.dim)
    throw InvalidConfig("model JSON prep has wrong length");
  for (int i = 0; i < sh.dim; ++i) m.prep[i] = prep[i];
  const auto& rows = j.at("confusion");
  if (static_cast<int>(rows.size()) != sh.dim)
    throw InvalidConfig("model JSON confusion has wrong row count");
  for (int l = 0; l < sh.dim; ++l) {
    auto row = rows.at(l).get<std::vector<double>>();
    if (static_cast<int>(row.size()) != sh.dim)
      throw InvalidConfig("model JSON confusion row has wrong length");
    for (int k = 0; k < sh.dim; ++k) m.confusion(l, k) = row[k];
  }
  validate(m, tol);
  return m;
}

inline SpamModel load_model(const std::string& path, double tol = kFileTol) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j, tol);
}

}  // namespace qspam
