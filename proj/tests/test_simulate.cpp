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

#include <catch2/catch_amalgamated.hpp>

#include "qspam/simulate.hpp"
#include "support/helpers.hpp"

using namespace qspam;
using qspam::testing::qubit_model;
using Catch::Matchers::WithinAbs;

namespace {

PermutationCircuit identity_circuit(const SystemShape& sh) {
  return PermutationCircuit(
      sh, std::vector<Permutation>(sh.n, identity_perm(sh.d)));
}

}  // namespace

TEST_CASE("outcome probabilities combine prep errors with readout confusion") {
  SpamModel m = qubit_model(0.01, 0.02, 0.03);
  Eigen::VectorXd p = exact_distribution(m, identity_circuit(m.shape));
  // Reading 1: prepared 0 and misread (0.99 * 0.02), or prepared 1 and
  // read correctly (0.01 * 0.97).
  REQUIRE_THAT(p[1], WithinAbs(0.0295, 1e-15));
  REQUIRE_THAT(p[0], WithinAbs(0.9705, 1e-15));

  PermutationCircuit flip(m.shape, {transposition(0, 1, 2)});
  Eigen::VectorXd q = exact_distribution(m, flip);
  // Reading 0 after a flip: prepared 0, flipped to 1, misread as 0
  // (0.99 * 0.03) plus prepared 1, flipped to 0, read correctly
  // (0.01 * 0.98).
  REQUIRE_THAT(q[0], WithinAbs(0.99 * 0.03 + 0.01 * 0.98, 1e-15));
}

TEST_CASE("a noiseless register yields a point mass on the permuted target") {
  for (const auto& sh : qspam::testing::small_shapes()) {
    SpamModel m(sh);
    for (const auto& circ : proposition_design(sh)) {
      Eigen::VectorXd p = exact_distribution(m, circ);
      for (int l = 0; l < sh.dim; ++l)
        REQUIRE(p[l] == (l == circ.apply(0) ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("exact distributions are normalized and nonnegative") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SpamModel m = random_model(SystemShape(2, 3), 0.05, seed);
    for (const auto& circ : proposition_design(m.shape)) {
      Eigen::VectorXd p = exact_distribution(m, circ);
      REQUIRE(p.minCoeff() >= 0.0);
      REQUIRE_THAT(p.sum(), WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("sampling is reproducible from the seed alone") {
  SpamModel m = qubit_model(0.01, 0.02, 0.03);
  CountsRecord a = sample(m, identity_circuit(m.shape), 10000, 77);
  CountsRecord b = sample(m, identity_circuit(m.shape), 10000, 77);
  REQUIRE(a.counts == b.counts);
  CountsRecord c = sample(m, identity_circuit(m.shape), 10000, 78);
  REQUIRE(a.counts != c.counts);
  REQUIRE(a.shots == 10000);
  REQUIRE(a.counts[0] + a.counts[1] == 10000);
  REQUIRE_THROWS_AS(sample(m, identity_circuit(m.shape), 0, 1), InvalidConfig);
}

TEST_CASE("sampled frequencies approach the exact distribution") {
  SpamModel m = qubit_model(0.01, 0.02, 0.03);
  CountsRecord rec = sample(m, identity_circuit(m.shape), 1000000, 5);
  double freq1 = rec.frequencies()[1];
  // Pr(1) = 0.0295; three sigma at 1e6 shots is about 5.1e-4.
  REQUIRE_THAT(freq1, WithinAbs(0.0295, 5.1e-4));
}

TEST_CASE("sampling has no systematic outcome bias") {
  // Average the empirical frequencies of one circuit over many seeds; the
  // mean must approach the exact distribution at the rate of the pooled
  // standard error.
  SpamModel m = random_model(SystemShape(1, 3), 0.05, 3);
  PermutationCircuit circ = identity_circuit(m.shape);
  Eigen::VectorXd p = exact_distribution(m, circ);
  const int kSeeds = 200;
  const std::int64_t kShots = 2000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m.shape.dim);
  for (int s = 0; s < kSeeds; ++s)
    mean += sample(m, circ, kShots, 1000 + s).frequencies();
  mean /= kSeeds;
  for (int l = 0; l < m.shape.dim; ++l) {
    double sigma = std::sqrt(p[l] * (1 - p[l]) / kShots);
    REQUIRE(std::abs(mean[l] - p[l]) <= 4.0 * sigma / std::sqrt(kSeeds));
  }
}

TEST_CASE("outcome relabeling commutes with the simulator") {
  // Permuting the readout labels, the applied circuit, and the confusion
  // matrix rows/columns together must leave the distribution unchanged:
  // Pr(sigma(l); sigma o pi) with relabeled confusion equals Pr(l; pi).
  for (const auto& sh : {SystemShape(1, 3), SystemShape(2, 2)}) {
    SpamModel m = random_model(sh, 0.05, 21);
    std::vector<Permutation> sigma;
    for (int q = 0; q < sh.n; ++q)
      sigma.push_back(sh.d == 2 ? transposition(0, 1, 2)
                                : Permutation{2, 0, 1});
    PermutationCircuit relabel(sh, sigma);
    SpamModel relabeled = m;
    for (int l = 0; l < sh.dim; ++l)
      for (int k = 0; k < sh.dim; ++k)
        relabeled.confusion(relabel.apply(l), relabel.apply(k)) =
            m.confusion(l, k);
    for (const auto& circ : proposition_design(sh)) {
      std::vector<Permutation> composed;
      for (int q = 0; q < sh.n; ++q) {
        Permutation cp(sh.d);
        for (int v = 0; v < sh.d; ++v) cp[v] = sigma[q][circ.perms[q][v]];
        composed.push_back(cp);
      }
      PermutationCircuit circ2(sh, composed);
      Eigen::VectorXd p = exact_distribution(m, circ);
      Eigen::VectorXd q2 = exact_distribution(relabeled, circ2);
      for (int l = 0; l < sh.dim; ++l)
        REQUIRE_THAT(q2[relabel.apply(l)], WithinAbs(p[l], 1e-14));
    }
  }
}

TEST_CASE("running a design yields one record per circuit with derived seeds") {
  SpamModel m = random_model(SystemShape(1, 3), 0.02, 9);
  auto circuits = proposition_design(m.shape);
  RunResult r = run_design(m, circuits, 100000, 4, false);
  REQUIRE(r.records.size() == 4);
  REQUIRE(r.discard_fraction == 0.0);
  for (std::size_t c = 0; c < circuits.size(); ++c) {
    REQUIRE(r.records[c].circuit == circuits[c]);
    std::int64_t total = 0;
    for (auto v : r.records[c].counts) total += v;
    REQUIRE(total == 100000);
    // records match a direct sample with the derived stream
    CountsRecord direct = sample(m, circuits[c], 100000, derive_seed(4, c));
    REQUIRE(r.records[c].counts == direct.counts);
  }
  RunResult empty = run_design(m, {}, 100, 4, false);
  REQUIRE(empty.records.empty());
}

TEST_CASE("post-selected runs condition the model and report the discard rate") {
  SpamModel m = qubit_model(0.01, 0.02, 0.03);
  auto circuits = proposition_design(m.shape);
  RunResult r = run_design(m, circuits, 50000, 12, true);
  REQUIRE_THAT(r.discard_fraction, WithinAbs(1.0 - 0.9705, 1e-12));
  RunResult direct = run_design(herald(m), circuits, 50000, 12, false);
  for (std::size_t c = 0; c < circuits.size(); ++c)
    REQUIRE(r.records[c].counts == direct.records[c].counts);

  // On a noiseless model post-selection changes nothing.
  SpamModel clean(SystemShape(1, 2));
  RunResult h = run_design(clean, circuits, 1000, 3, true);
  RunResult u = run_design(clean, circuits, 1000, 3, false);
  REQUIRE(h.discard_fraction == 0.0);
  for (std::size_t c = 0; c < circuits.size(); ++c)
    REQUIRE(h.records[c].counts == u.records[c].counts);

  SpamModel blocked(SystemShape(1, 2));
  blocked.confusion << 0.0, 0.0, 1.0, 1.0;
  REQUIRE_THROWS_AS(run_design(blocked, circuits, 10, 1, true),
                    HeraldImpossible);
}

TEST_CASE("counts survive a JSON round trip and reject corrupt files") {
  SpamModel m = random_model(SystemShape(2, 3), 0.05, 2);
  CountsRecord rec = sample(m, proposition_design(m.shape)[3], 5000, 8);
  nlohmann::json j = counts_to_json(rec);
  REQUIRE(j.at("schema") == "qspam.counts/1");
  CountsRecord rec2 = counts_from_json(j);
  REQUIRE(rec2.counts == rec.counts);
  REQUIRE(rec2.shots == rec.shots);
  REQUIRE(rec2.circuit == rec.circuit);
  // zero counts are omitted from the file
  for (const auto& [label, v] : j.at("counts").items()) REQUIRE(v.get<std::int64_t>() > 0);

  nlohmann::json neg = j;
  neg["counts"]["00"] = -5;
  REQUIRE_THROWS_AS(counts_from_json(neg), InvalidConfig);
  nlohmann::json off = j;
  off["shots"] = rec.shots + 1;
  REQUIRE_THROWS_AS(counts_from_json(off), InvalidConfig);
  nlohmann::json missing = j;
  missing.erase("circuit");
  REQUIRE_THROWS_AS(counts_from_json(missing), InvalidConfig);
}
