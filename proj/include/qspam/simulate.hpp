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

#include "qspam/design.hpp"
#include "qspam/errors.hpp"
#include "qspam/model.hpp"
#include "qspam/rng.hpp"

namespace qspam {

/** Shot record for one circuit. counts[l] is the number of shots that
 *  returned basis outcome l; the entries sum to shots. */
struct CountsRecord {
  PermutationCircuit circuit;
  std::int64_t shots = 0;
  std::vector<std::int64_t> counts;  // dense, indexed by outcome

  Eigen::VectorXd frequencies() const {
    Eigen::VectorXd f(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      f[static_cast<Eigen::Index>(i)] =
          static_cast<double>(counts[i]) / static_cast<double>(shots);
    return f;
  }
};

/** Exact outcome distribution: Pr(l) = sum_j prep_j * confusion(l, pi(j)).
 *  Permuting the prepared populations and reading them through the
 *  confusion matrix. */
inline Eigen::VectorXd exact_distribution(const SpamModel& m,
                                          const PermutationCircuit& circuit) {
  const int D = m.shape.dim;
  Eigen::VectorXd permuted = Eigen::VectorXd::Zero(D);
  for (int j = 0; j < D; ++j) permuted[circuit.apply(j)] += m.prep[j];
  return m.confusion * permuted;
}

/** Multinomial draw by per-shot inverse CDF.
 *
 *  Each shot consumes one uniform u in [0, 1): the outcome is the
 *  smallest l with u < cumsum(probs)[l]; if accumulated roundoff leaves
 *  u beyond the final cumulative value, the last outcome is returned.
 *  Deterministic given the generator state.
 */
inline std::vector<std::int64_t> multinomial(const Eigen::VectorXd& probs,
                                             std::int64_t shots,
                                             SplitMix64& rng) {
  const int D = static_cast<int>(probs.size());
  std::vector<double> cum(D);
  double acc = 0.0;
  for (int i = 0; i < D; ++i) {
    acc += probs[i];
    cum[i] = acc;
  }
  std::vector<std::int64_t> counts(D, 0);
  for (std::int64_t s = 0; s < shots; ++s) {
    double u = rng.uniform();
    int l = D - 1;
    for (int i = 0; i < D; ++i) {
      if (u < cum[i]) {
        l = i;
        break;
      }
    }
    ++counts[l];
  }
  return counts;
}

/** Sample one circuit. The seed alone pins the counts bit-for-bit. */
inline CountsRecord sample(const SpamModel& m,
                           const PermutationCircuit& circuit,
                           std::int64_t shots, std::uint64_t seed) {
  if (shots < 1) throw InvalidConfig("shots must be >= 1");
  CountsRecord rec;
  rec.circuit = circuit;
  rec.shots = shots;
  SplitMix64 rng(seed);
  rec.counts = multinomial(exact_distribution(m, circuit), shots, rng);
  return rec;
}

struct RunResult {
  std::vector<CountsRecord> records;
  double discard_fraction = 0.0;  // herald rejection rate (0 when off)
};

/** Run a circuit list. Heralding is simulated by conditioning: the model
 *  is replaced by its post-selected version and the rejected fraction is
 *  reported instead of wasting shots. Per-circuit seeds are derived from
 *  the master seed and the circuit index, so any execution order (or
 *  worker count) yields identical records. */
inline RunResult run_design(const SpamModel& m,
                            const std::vector<PermutationCircuit>& circuits,
                            std::int64_t shots, std::uint64_t seed,
                            bool heralded) {
  RunResult out;
  SpamModel effective = m;
  if (heralded) {
    out.discard_fraction = 1.0 - herald_acceptance(m);
    effective = herald(m);
  }
  out.records.reserve(circuits.size());
  for (std::size_t c = 0; c < circuits.size(); ++c)
    out.records.push_back(
        sample(effective, circuits[c], shots, derive_seed(seed, c)));
  return out;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

/** {"circuit": [...], "shots": N, "counts": {"02": 13, ...}} with outcome
 *  labels as base-d digit strings; zero counts omitted. */
inline nlohmann::json counts_to_json(const CountsRecord& rec) {
  nlohmann::json j;
  j["schema"] = "qspam.counts/1";
  j["n"] = rec.circuit.shape.n;
  j["d"] = rec.circuit.shape.d;
  j["circuit"] = rec.circuit.perms;
  j["shots"] = rec.shots;
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t l = 0; l < rec.counts.size(); ++l)
    if (rec.counts[l] != 0)
      counts[rec.circuit.shape.basis_label(static_cast<int>(l))] =
          rec.counts[l];
  j["counts"] = counts;
  return j;
}

inline CountsRecord counts_from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("d") || !j.contains("circuit") ||
      !j.contains("shots") || !j.contains("counts"))
    throw InvalidConfig("counts JSON lacks n/d/circuit/shots/counts");
  SystemShape sh(j.at("n").get<int>(), j.at("d").get<int>());
  CountsRecord rec;
  rec.circuit = PermutationCircuit(
      sh, j.at("circuit").get<std::vector<Permutation>>());
  rec.shots = j.at("shots").get<std::int64_t>();
  rec.counts.assign(sh.dim, 0);
  std::int64_t total = 0;
  for (const auto& [label, v] : j.at("counts").items()) {
    std::int64_t cnt = v.get<std::int64_t>();
    if (cnt < 0) throw InvalidConfig("negative count for outcome " + label);
    rec.counts[sh.parse_basis_label(label)] = cnt;
    total += cnt;
  }
  if (total != rec.shots)
    throw InvalidConfig("counts do not sum to shots");
  return rec;
}

inline CountsRecord load_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open counts file: " + path);
  nlohmann::json j;
  in >> j;
  return counts_from_json(j);
}

}  // namespace qspam
