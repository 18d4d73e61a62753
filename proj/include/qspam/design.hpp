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
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspam/errors.hpp"
#include "qspam/gauge.hpp"
#include "qspam/model.hpp"
#include "qspam/shape.hpp"

namespace qspam {

/** Permutation of {0..d-1} in one-line notation: perm[j] is the image of
 *  level j. */
using Permutation = std::vector<int>;

inline Permutation identity_perm(int d) {
  Permutation p(d);
  for (int i = 0; i < d; ++i) p[i] = i;
  return p;
}

/** Permutation swapping levels j and k (the generalized X gate X_{jk}). */
inline Permutation transposition(int j, int k, int d) {
  if (!(0 <= j && j < k && k < d))
    throw IndexOutOfRange("transposition needs 0 <= j < k < d");
  Permutation p = identity_perm(d);
  std::swap(p[j], p[k]);
  return p;
}

inline bool is_permutation(const Permutation& p, int d) {
  if (static_cast<int>(p.size()) != d) return false;
  std::vector<bool> seen(d, false);
  for (int v : p) {
    if (v < 0 || v >= d || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

/** One circuit layer: an independent level permutation on each qudit. */
struct PermutationCircuit {
  SystemShape shape;
  std::vector<Permutation> perms;  // length n

  PermutationCircuit() = default;
  PermutationCircuit(const SystemShape& sh, std::vector<Permutation> ps)
      : shape(sh), perms(std::move(ps)) {
    if (static_cast<int>(perms.size()) != sh.n)
      throw IndexOutOfRange("circuit needs one permutation per qudit");
    for (const auto& p : perms)
      if (!is_permutation(p, sh.d))
        throw IndexOutOfRange("invalid level permutation in circuit");
  }

  /** Image of a register basis index under the product permutation. */
  int apply(int index) const {
    std::vector<int> dg = shape.digits(index);
    for (int q = 0; q < shape.n; ++q) dg[q] = perms[q][dg[q]];
    return shape.index_of(dg);
  }

  int apply_inverse(int index) const {
    std::vector<int> dg = shape.digits(index);
    for (int q = 0; q < shape.n; ++q) {
      int img = dg[q];
      for (int v = 0; v < shape.d; ++v) {
        if (perms[q][v] == img) {
          dg[q] = v;
          break;
        }
      }
    }
    return shape.index_of(dg);
  }

  /** Gate-list name, e.g. "X01.I" (qudit order, '.' separated). */
  std::string name() const {
    std::string s;
    for (int q = 0; q < shape.n; ++q) {
      if (q) s += ".";
      bool id = true;
      for (int v = 0; v < shape.d; ++v)
        if (perms[q][v] != v) id = false;
      if (id) {
        s += "I";
        continue;
      }
      // find the swapped pair (all design gates are transpositions)
      int a = -1, b = -1;
      for (int v = 0; v < shape.d; ++v) {
        if (perms[q][v] != v) {
          if (a < 0)
            a = v;
          else
            b = v;
        }
      }
      if (b >= 0 && perms[q][a] == b && perms[q][b] == a &&
          [&] {
            for (int v = 0; v < shape.d; ++v)
              if (v != a && v != b && perms[q][v] != v) return false;
            return true;
          }()) {
        s += "X" + std::to_string(a) + std::to_string(b);
      } else {
        s += "P";
        for (int v = 0; v < shape.d; ++v) s += std::to_string(perms[q][v]);
      }
    }
    return s;
  }

  bool operator==(const PermutationCircuit& o) const {
    return shape == o.shape && perms == o.perms;
  }
};

/** The two permutation families that make every error parameter reachable
 *  at first order.
 *
 *  Family one: for h in {1..d-1}^n, qudit i applies the identity when
 *  h_i = 1 and the transposition (1, h_i) when h_i > 1. Family two: for
 *  k in Z_d^n \ {0}, qudit i applies the identity when k_i = 0 and the
 *  transposition (0, k_i) otherwise. The identity circuit appears in both
 *  families and is kept once (deduplication by exact permutation
 *  equality). Total count: (d-1)^n + d^n - 1 <= 2 d^n.
 */
inline std::vector<PermutationCircuit> proposition_design(
    const SystemShape& sh) {
  std::vector<PermutationCircuit> out;
  std::set<std::vector<Permutation>> seen;
  auto push = [&](std::vector<Permutation> ps) {
    if (seen.insert(ps).second) out.emplace_back(sh, std::move(ps));
  };

  // family one, h odometer in lexicographic order (qudit 0 most significant)
  std::vector<int> h(sh.n, 1);
  while (true) {
    std::vector<Permutation> ps;
    for (int q = 0; q < sh.n; ++q)
      ps.push_back(h[q] == 1 ? identity_perm(sh.d)
                             : transposition(1, h[q], sh.d));
    push(std::move(ps));
    int q = sh.n - 1;
    while (q >= 0 && h[q] == sh.d - 1) h[q--] = 1;
    if (q < 0) break;
    ++h[q];
  }

  // family two, k = 1 .. d^n - 1 in index order
  for (int k = 1; k < sh.dim; ++k) {
    std::vector<Permutation> ps;
    for (int q = 0; q < sh.n; ++q) {
      int kq = sh.digit(k, q);
      ps.push_back(kq == 0 ? identity_perm(sh.d)
                           : transposition(0, kq, sh.d));
    }
    push(std::move(ps));
  }
  return out;
}

// ---------------------------------------------------------------------------
// First-order design matrix
// ---------------------------------------------------------------------------

/** One measured probability as an affine function of the error vector:
 *  Pr(outcome; circuit) = offset + sum_i coeff_i * eps_i + O(eps^2). */
struct DesignRow {
  int circuit_index = 0;
  int outcome = 0;
  std::vector<std::pair<int, double>> entries;  // (epsilon index, coeff)
  double offset = 0.0;
};

/** First-order row for outcome l of a permutation circuit pi:
 *  Pr(l; X_pi) = c_{pi^{-1}(l)} + s_{l, pi(0)} + O(eps^2), valid for all
 *  l != pi(0). The dominant outcome pi(0) is excluded: its probability is
 *  fixed by normalization and carries no independent information. */
inline DesignRow first_order_row(const PermutationCircuit& circuit, int l) {
  const SystemShape& sh = circuit.shape;
  if (l < 0 || l >= sh.dim) throw IndexOutOfRange("outcome out of range");
  const int pi0 = circuit.apply(0);
  if (l == pi0)
    throw DominantOutcome("no first-order row for the dominant outcome");
  DesignRow row;
  row.outcome = l;
  row.offset = 0.0;
  const int t = circuit.apply_inverse(l);
  if (t != 0) row.entries.emplace_back(prep_param_index(sh, t), 1.0);
  row.entries.emplace_back(confusion_param_index(sh, l, pi0), 1.0);
  return row;
}

struct DesignMatrix {
  SystemShape shape;
  std::vector<PermutationCircuit> circuits;
  std::vector<DesignRow> rows;
  int rank = 0;
  std::string id;

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd M =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                              shape.num_params());
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (const auto& [c, v] : rows[r].entries)
        M(static_cast<Eigen::Index>(r), c) = v;
    return M;
  }

  /** Learnable-subspace dimension this design must reach. */
  int expected_rank() const {
    return shape.num_params() - shape.num_subsets();
  }
};

/** Stack first-order rows for all non-dominant outcomes of every circuit
 *  and record the numerical rank. */
inline DesignMatrix build_design(const std::vector<PermutationCircuit>& circuits,
                                 const std::string& id = "custom") {
  if (circuits.empty()) throw InvalidConfig("design needs at least one circuit");
  DesignMatrix dm;
  dm.shape = circuits.front().shape;
  dm.circuits = circuits;
  dm.id = id;
  for (std::size_t c = 0; c < circuits.size(); ++c) {
    if (circuits[c].shape != dm.shape)
      throw InvalidConfig("all circuits in a design must share one shape");
    const int pi0 = circuits[c].apply(0);
    for (int l = 0; l < dm.shape.dim; ++l) {
      if (l == pi0) continue;
      DesignRow row = first_order_row(circuits[c], l);
      row.circuit_index = static_cast<int>(c);
      dm.rows.push_back(std::move(row));
    }
  }
  dm.rank = matrix_rank(dm.dense());
  return dm;
}

inline DesignMatrix proposition_design_matrix(const SystemShape& sh) {
  return build_design(proposition_design(sh),
                      "prop_d" + std::to_string(sh.d) + "_n" +
                          std::to_string(sh.n));
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::json design_to_json(const DesignMatrix& dm) {
  nlohmann::json j;
  j["schema"] = "qspam.design/1";
  j["n"] = dm.shape.n;
  j["d"] = dm.shape.d;
  j["id"] = dm.id;
  nlohmann::json circuits = nlohmann::json::array();
  nlohmann::json names = nlohmann::json::array();
  for (const auto& c : dm.circuits) {
    circuits.push_back(c.perms);
    names.push_back(c.name());
  }
  j["circuits"] = circuits;
  j["gates"] = names;
  j["certificate"] = {{"count", dm.circuits.size()},
                      {"rank", dm.rank},
                      {"expected_rank", dm.expected_rank()}};
  return j;
}

inline DesignMatrix design_from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("d") || !j.contains("circuits"))
    throw InvalidConfig("design JSON lacks n/d/circuits");
  SystemShape sh(j.at("n").get<int>(), j.at("d").get<int>());
  std::vector<PermutationCircuit> circuits;
  for (const auto& c : j.at("circuits"))
    circuits.emplace_back(sh, c.get<std::vector<Permutation>>());
  return build_design(circuits, j.value("id", std::string("custom")));
}

inline DesignMatrix load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open design file: " + path);
  nlohmann::json j;
  in >> j;
  return design_from_json(j);
}

}  // namespace qspam
