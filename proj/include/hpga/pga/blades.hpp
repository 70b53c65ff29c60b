// Copyright 2026 The hpga-dp Authors
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

#ifndef HPGA_PGA_BLADES_HPP_
#define HPGA_PGA_BLADES_HPP_

#include <array>
#include <cstdint>

// Basis blade tables for G(3,0,1): four generators e0, e1, e2, e3 with
// e0^2 = 0 and e1^2 = e2^2 = e3^2 = 1. All product tables are generated at
// build time (constexpr) from bitmask blade representations.
//
// Canonical coefficient order (see docs/algebra.md):
//   [1, e0, e1, e2, e3, e01, e02, e03, e12, e13, e23,
//    e012, e013, e023, e123, e0123]

namespace hpga::pga {

inline constexpr int kNumBlades = 16;

// Bit i of a mask marks the presence of generator e_i.
inline constexpr std::array<uint8_t, kNumBlades> kBladeMask = {
    0b0000,                           // 1
    0b0001, 0b0010, 0b0100, 0b1000,   // e0 e1 e2 e3
    0b0011, 0b0101, 0b1001,           // e01 e02 e03
    0b0110, 0b1010, 0b1100,           // e12 e13 e23
    0b0111, 0b1011, 0b1101, 0b1110,   // e012 e013 e023 e123
    0b1111,                           // e0123
};

constexpr int popcount4(unsigned m) {
  int n = 0;
  for (unsigned b = m; b != 0; b >>= 1) n += static_cast<int>(b & 1u);
  return n;
}

constexpr std::array<int8_t, kNumBlades> make_index_of_mask() {
  std::array<int8_t, kNumBlades> inv{};
  for (int i = 0; i < kNumBlades; ++i) inv[kBladeMask[i]] = static_cast<int8_t>(i);
  return inv;
}
inline constexpr std::array<int8_t, kNumBlades> kIndexOfMask = make_index_of_mask();

constexpr std::array<int8_t, kNumBlades> make_grades() {
  std::array<int8_t, kNumBlades> g{};
  for (int i = 0; i < kNumBlades; ++i) g[i] = static_cast<int8_t>(popcount4(kBladeMask[i]));
  return g;
}
// Grade of each blade index in canonical order.
inline constexpr std::array<int8_t, kNumBlades> kGrade = make_grades();

// Sign from reordering the concatenation of two sorted index lists into one
// sorted list; counts transpositions with the usual shift-and-mask scheme.
constexpr int reorder_sign(unsigned a, unsigned b) {
  int swaps = 0;
  a >>= 1;
  while (a != 0) {
    swaps += popcount4(a & b);
    a >>= 1;
  }
  return (swaps & 1) ? -1 : 1;
}

struct BladeProduct {
  int8_t index;  // target blade index, -1 when the product vanishes
  int8_t sign;   // -1, 0, +1
};

using ProductTable = std::array<std::array<BladeProduct, kNumBlades>, kNumBlades>;

// Geometric product of basis blades. Shared generators contract: e0 kills the
// term, e1..e3 contribute +1.
constexpr ProductTable make_geometric_table() {
  ProductTable t{};
  for (int i = 0; i < kNumBlades; ++i) {
    for (int j = 0; j < kNumBlades; ++j) {
      unsigned a = kBladeMask[i];
      unsigned b = kBladeMask[j];
      if ((a & b & 1u) != 0) {
        t[i][j] = {-1, 0};  // e0 * e0 = 0
        continue;
      }
      int sign = reorder_sign(a, b);
      t[i][j] = {kIndexOfMask[a ^ b], static_cast<int8_t>(sign)};
    }
  }
  return t;
}
inline constexpr ProductTable kGeometricTable = make_geometric_table();

// Outer (wedge) product: vanishes whenever the operands share a generator,
// including e0; otherwise the reordered union.
constexpr ProductTable make_wedge_table() {
  ProductTable t{};
  for (int i = 0; i < kNumBlades; ++i) {
    for (int j = 0; j < kNumBlades; ++j) {
      unsigned a = kBladeMask[i];
      unsigned b = kBladeMask[j];
      if ((a & b) != 0) {
        t[i][j] = {-1, 0};
        continue;
      }
      t[i][j] = {kIndexOfMask[a | b], static_cast<int8_t>(reorder_sign(a, b))};
    }
  }
  return t;
}
inline constexpr ProductTable kWedgeTable = make_wedge_table();

// Poincare dual: basis complement with the sign fixed by
// blade ^ dual(blade) = +e0123.
struct DualEntry {
  int8_t index;
  int8_t sign;
};

constexpr std::array<DualEntry, kNumBlades> make_dual_table() {
  std::array<DualEntry, kNumBlades> t{};
  for (int i = 0; i < kNumBlades; ++i) {
    unsigned comp = (~kBladeMask[i]) & 0xFu;
    int ci = kIndexOfMask[comp];
    // wedge(blade_i, blade_ci) = s * e0123 with s = +-1; pick dual sign 1/s.
    int s = reorder_sign(kBladeMask[i], comp);
    t[i] = {static_cast<int8_t>(ci), static_cast<int8_t>(s)};
  }
  return t;
}
inline constexpr std::array<DualEntry, kNumBlades> kDualTable = make_dual_table();

// Join of basis blades: dual(dual(a) ^ dual(b)), tabulated once so the
// network kernels can treat it like any other bilinear table.
constexpr ProductTable make_join_table() {
  ProductTable t{};
  for (int i = 0; i < kNumBlades; ++i) {
    for (int j = 0; j < kNumBlades; ++j) {
      DualEntry da = kDualTable[i];
      DualEntry db = kDualTable[j];
      BladeProduct w = kWedgeTable[da.index][db.index];
      if (w.index < 0) {
        t[i][j] = {-1, 0};
        continue;
      }
      DualEntry dw = kDualTable[w.index];
      t[i][j] = {dw.index, static_cast<int8_t>(da.sign * db.sign * w.sign * dw.sign)};
    }
  }
  return t;
}
inline constexpr ProductTable kJoinTable = make_join_table();

// Reversion sign per grade: (-1)^(k(k-1)/2).
constexpr std::array<int8_t, kNumBlades> make_reverse_signs() {
  std::array<int8_t, kNumBlades> s{};
  for (int i = 0; i < kNumBlades; ++i) {
    int k = kGrade[i];
    s[i] = static_cast<int8_t>(((k * (k - 1) / 2) % 2 == 0) ? 1 : -1);
  }
  return s;
}
inline constexpr std::array<int8_t, kNumBlades> kReverseSign = make_reverse_signs();

// Blades free of e0; only these contribute to the invariant inner product.
constexpr std::array<bool, kNumBlades> make_euclidean_mask() {
  std::array<bool, kNumBlades> m{};
  for (int i = 0; i < kNumBlades; ++i) m[i] = (kBladeMask[i] & 1u) == 0;
  return m;
}
inline constexpr std::array<bool, kNumBlades> kEuclideanBlade = make_euclidean_mask();

// Named indices into the canonical order, for readability at call sites.
enum BladeIndex : int {
  kS = 0,
  kE0 = 1, kE1 = 2, kE2 = 3, kE3 = 4,
  kE01 = 5, kE02 = 6, kE03 = 7, kE12 = 8, kE13 = 9, kE23 = 10,
  kE012 = 11, kE013 = 12, kE023 = 13, kE123 = 14,
  kE0123 = 15,
};

}  // namespace hpga::pga

#endif  // HPGA_PGA_BLADES_HPP_
