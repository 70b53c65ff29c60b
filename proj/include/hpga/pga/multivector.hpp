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

#ifndef HPGA_PGA_MULTIVECTOR_HPP_
#define HPGA_PGA_MULTIVECTOR_HPP_

#include <array>
#include <cmath>
#include <string>

#include "hpga/pga/blades.hpp"

namespace hpga::pga {

// A G(3,0,1) multivector: 16 real coefficients in the canonical blade order.
// All operations are pure; no coefficient layout other than the canonical one
// exists anywhere in this codebase.
class Multivector {
 public:
  Multivector() : c_{} {}
  explicit Multivector(const std::array<double, kNumBlades>& c) : c_(c) {}

  static Multivector scalar(double s) {
    Multivector m;
    m.c_[kS] = s;
    return m;
  }
  static Multivector basis(int blade_index, double coeff = 1.0) {
    Multivector m;
    m.c_[blade_index] = coeff;
    return m;
  }

  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  const std::array<double, kNumBlades>& coeffs() const { return c_; }

  Multivector& operator+=(const Multivector& o) {
    for (int i = 0; i < kNumBlades; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Multivector& operator-=(const Multivector& o) {
    for (int i = 0; i < kNumBlades; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Multivector& operator*=(double s) {
    for (int i = 0; i < kNumBlades; ++i) c_[i] *= s;
    return *this;
  }

  friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
  friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
  friend Multivector operator*(Multivector a, double s) { return a *= s; }
  friend Multivector operator*(double s, Multivector a) { return a *= s; }
  friend Multivector operator-(const Multivector& a) { return a * -1.0; }

  bool all_finite() const {
    for (double v : c_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  // Euclidean norm over all 16 coefficients (a plain vector-space norm, not
  // the invariant inner product).
  double frobenius_norm() const {
    double s = 0.0;
    for (double v : c_) s += v * v;
    return std::sqrt(s);
  }

  std::string to_string() const;

 private:
  std::array<double, kNumBlades> c_;
};

// Geometric product, the bilinear expansion over the Cayley table.
Multivector geometric_product(const Multivector& a, const Multivector& b);

// Outer (wedge) product.
Multivector outer_product(const Multivector& a, const Multivector& b);

// Invariant inner product: sum of coefficient products over blades that do
// not contain e0. Invariant under proper rigid motions.
double inner_product_invariant(const Multivector& a, const Multivector& b);

// Poincare dual with the sign convention blade ^ dual(blade) = +e0123.
Multivector dual(const Multivector& a);

// Join: dual(dual(a) ^ dual(b)).
Multivector join(const Multivector& a, const Multivector& b);

// Reversion: grade-k part scaled by (-1)^(k(k-1)/2).
Multivector reverse(const Multivector& a);

// Grade projection; throws std::invalid_argument for k outside 0..4.
Multivector grade_project(const Multivector& a, int k);

}  // namespace hpga::pga

#endif  // HPGA_PGA_MULTIVECTOR_HPP_
