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

// Brute-force two-qubit oracle for the decay experiment: explicit 4x4
// complex matrices, channels applied as Pauli-basis spectral sums, the
// entangling gate applied by matrix conjugation. Everything here is
// independent of the closed-form decay model in the library; agreement
// between the two is what the sign-convention tests certify.

#include <Eigen/Dense>
#include <complex>

#include "qspam/pauli.hpp"

namespace qspam::testing {

using CMat = Eigen::Matrix4cd;

inline Eigen::Matrix2cd one_qubit_pauli(int letter) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd m;
  switch (letter) {
    case 0: m << 1, 0, 0, 1; break;           // I
    case 1: m << 0, 1, 1, 0; break;           // X
    case 2: m << 0, -1i, 1i, 0; break;        // Y
    default: m << 1, 0, 0, -1; break;         // Z
  }
  return m;
}

inline CMat pauli_matrix(const PauliLabel& a) {
  const int code = a.code();
  Eigen::Matrix2cd q0 = one_qubit_pauli(code / 4);
  Eigen::Matrix2cd q1 = one_qubit_pauli(code % 4);
  CMat out;
  for (int r0 = 0; r0 < 2; ++r0)
    for (int c0 = 0; c0 < 2; ++c0)
      out.block<2, 2>(2 * r0, 2 * c0) = q0(r0, c0) * q1;
  return out;
}

inline CMat cz_matrix() {
  CMat m = CMat::Identity();
  m(3, 3) = -1.0;
  return m;
}

/** Apply a Pauli channel to a density matrix via its diagonal transfer
 *  matrix: rho' = sum_b lambda_b P_b Tr[P_b rho] / 4. */
inline CMat apply_pauli_channel(const PauliChannel& ch, const CMat& rho) {
  CMat out = CMat::Zero();
  for (const auto& b : all_pauli_labels(2)) {
    const CMat pb = pauli_matrix(b);
    out += ch.lambda[b.code()] * pb * (pb * rho).trace() / 4.0;
  }
  return out;
}

/** Support-symmetrized SPAM noise as an explicit Pauli channel. */
inline PauliChannel channel_from_factors(const std::vector<double>& by_support) {
  PauliChannel ch;
  ch.n = 2;
  ch.lambda = Eigen::VectorXd::Ones(16);
  for (const auto& b : all_pauli_labels(2))
    ch.lambda[b.code()] = by_support[b.support()];
  return ch;
}

/** Full matrix-level simulation of the decay experiment: prepare the
 *  +1 component of P_a, apply preparation noise, alternate the gate
 *  noise channel and the ideal entangling gate 2t+1 times, apply
 *  measurement noise, then read out the sign-corrected conjugated
 *  operator. */
inline double oracle_cb_value(const CbTruth& truth, const PauliLabel& a,
                              int t) {
  const CMat cz = cz_matrix();
  CMat rho = (CMat::Identity() + pauli_matrix(a)) / 4.0;
  rho = apply_pauli_channel(channel_from_factors(truth.spam.lam_s), rho);
  for (int step = 0; step < 2 * t + 1; ++step) {
    rho = apply_pauli_channel(truth.channel, rho);
    rho = cz * rho * cz;  // CZ is real-diagonal and self-inverse
  }
  rho = apply_pauli_channel(channel_from_factors(truth.spam.lam_m), rho);
  auto [ga, sign] = cz_action(a);
  return sign * (pauli_matrix(ga) * rho).trace().real();
}

}  // namespace qspam::testing
