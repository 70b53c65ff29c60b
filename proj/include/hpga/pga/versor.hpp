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

#ifndef HPGA_PGA_VERSOR_HPP_
#define HPGA_PGA_VERSOR_HPP_

#include "hpga/pga/entities.hpp"
#include "hpga/pga/multivector.hpp"

namespace hpga::pga {

// An even-grade multivector encoding a proper rigid motion (rotor, translator,
// or product of the two). Construction validates v * reverse(v) = 1.
class Versor {
 public:
  // Throws std::domain_error if mv has odd-grade support or fails the
  // unit-norm check |v*rev(v) - 1| <= 1e-6.
  explicit Versor(const Multivector& mv);

  static Versor identity() { return Versor(Multivector::scalar(1.0)); }
  // Rotation about a (not necessarily unit) axis by `angle` radians,
  // matching the unit-quaternion convention of embed().
  static Versor rotor(double ax, double ay, double az, double angle);
  static Versor rotor(const UnitQuaternion& q) { return Versor(embed(q)); }
  // Translation of points by (dx, dy, dz) under the sandwich action.
  static Versor translator(double dx, double dy, double dz);

  const Multivector& mv() const { return mv_; }
  Versor reversed() const { return Versor(reverse(mv_)); }
  friend Versor operator*(const Versor& a, const Versor& b) {
    return Versor(geometric_product(a.mv_, b.mv_));
  }

 private:
  Multivector mv_;
};

// v * a * reverse(v): applies the rigid motion encoded by v.
Multivector sandwich(const Versor& v, const Multivector& a);

}  // namespace hpga::pga

#endif  // HPGA_PGA_VERSOR_HPP_
