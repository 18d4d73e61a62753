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

#include <cstdint>
#include <string>
#include <vector>

#include "qspam/errors.hpp"

namespace qspam {

/** Shape of an n-qudit register with d levels per qudit.
 *
 *  Computational basis states are indexed 0 .. d^n - 1. The index is the
 *  value of the base-d digit string with qudit 0 as the most significant
 *  digit, so lexicographic order on digit strings equals numeric order.
 *  Qudit subsets are bitmasks with bit i standing for qudit i.
 */
struct SystemShape {
  int n = 1;
  int d = 2;
  int dim = 2;  // d^n

  SystemShape() = default;

  SystemShape(int n_, int d_) : n(n_), d(d_) {
    if (n < 1 || d < 2) throw IndexOutOfRange("SystemShape: need n >= 1, d >= 2");
    long long D = 1;
    for (int i = 0; i < n; ++i) {
      D *= d;
      if (D > 65536) throw IndexOutOfRange("SystemShape: d^n too large");
    }
    dim = static_cast<int>(D);
  }

  bool operator==(const SystemShape& o) const { return n == o.n && d == o.d; }
  bool operator!=(const SystemShape& o) const { return !(*this == o); }

  /** Number of independent error parameters, d^n * d^n - 1. */
  int num_params() const { return dim * dim - 1; }

  /** Number of non-empty qudit subsets, 2^n - 1. */
  int num_subsets() const { return (1 << n) - 1; }

  /** Digit of basis index at qudit position q (0 = most significant). */
  int digit(int index, int q) const {
    int div = 1;
    for (int i = n - 1; i > q; --i) div *= d;
    return (index / div) % d;
  }

  std::vector<int> digits(int index) const {
    std::vector<int> out(n);
    for (int q = n - 1; q >= 0; --q) {
      out[q] = index % d;
      index /= d;
    }
    return out;
  }

  int index_of(const std::vector<int>& digits_) const {
    int idx = 0;
    for (int q = 0; q < n; ++q) {
      if (digits_[q] < 0 || digits_[q] >= d)
        throw IndexOutOfRange("digit out of range");
      idx = idx * d + digits_[q];
    }
    return idx;
  }

  /** Basis label as a base-d digit string, e.g. "02" for n=2, d=3. */
  std::string basis_label(int index) const {
    std::string s(n, '0');
    for (int q = n - 1; q >= 0; --q) {
      s[q] = static_cast<char>('0' + index % d);
      index /= d;
    }
    return s;
  }

  int parse_basis_label(const std::string& s) const {
    if (static_cast<int>(s.size()) != n)
      throw IndexOutOfRange("basis label has wrong length: " + s);
    int idx = 0;
    for (char c : s) {
      int v = c - '0';
      if (v < 0 || v >= d) throw IndexOutOfRange("basis label digit out of range: " + s);
      idx = idx * d + v;
    }
    return idx;
  }

  /** Bitmask of qudits where the index has a nonzero digit. */
  std::uint32_t pattern(int index) const {
    std::uint32_t m = 0;
    for (int q = n - 1; q >= 0; --q) {
      if (index % d != 0) m |= (1u << q);
      index /= d;
    }
    return m;
  }

  /** True when every digit of `index` outside `mask` is zero. */
  bool zero_off(std::uint32_t mask, int index) const {
    return (pattern(index) & ~mask) == 0;
  }

  /** True when a and b agree on every qudit outside `mask`. */
  bool agree_off(std::uint32_t mask, int a, int b) const {
    for (int q = n - 1; q >= 0; --q) {
      bool inside = (mask >> q) & 1u;
      if (!inside && (a % d) != (b % d)) return false;
      a /= d;
      b /= d;
    }
    return true;
  }

  /** Index with all digits inside `mask` replaced by zero. Serves as the
   *  key of the orbit {i : i agrees with index off mask}. */
  int zero_inside(std::uint32_t mask, int index) const {
    int out = 0;
    int place = 1;
    for (int q = n - 1; q >= 0; --q) {
      int dig = index % d;
      index /= d;
      if (!((mask >> q) & 1u)) out += dig * place;
      place *= d;
    }
    return out;
  }

  /** Bitmask of qudits where a and b disagree. */
  std::uint32_t disagree_mask(int a, int b) const {
    std::uint32_t m = 0;
    for (int q = n - 1; q >= 0; --q) {
      if ((a % d) != (b % d)) m |= (1u << q);
      a /= d;
      b /= d;
    }
    return m;
  }

  /** d^popcount(mask): size of one orbit of the subset `mask`. */
  int subset_dim(std::uint32_t mask) const {
    int D = 1;
    for (int q = 0; q < n; ++q)
      if ((mask >> q) & 1u) D *= d;
    return D;
  }

  /** Subset label like "{1,3}" with 1-based qudit numbers. */
  std::string subset_label(std::uint32_t mask) const {
    std::string s = "{";
    for (int q = 0; q < n; ++q) {
      if ((mask >> q) & 1u) {
        if (s.size() > 1) s += ",";
        s += std::to_string(q + 1);
      }
    }
    return s + "}";
  }
};

}  // namespace qspam
