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

#ifndef HPGA_PGA_ENTITIES_HPP_
#define HPGA_PGA_ENTITIES_HPP_

#include <cmath>

#include "hpga/pga/multivector.hpp"

// Conversions between standard spatial entities and multivectors.
//
// Points use the dual (trivector) form: (x,y,z) maps to
//   -z*e012 + y*e013 - x*e023 + e123
// so the e123 coefficient is the homogeneous weight. Unit quaternions map to
// the even subalgebra as w - z*e12 + y*e13 - x*e23.

namespace hpga::pga {

struct Scalar {
  double value = 0.0;
};

struct Direction {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct Point {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct UnitQuaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  UnitQuaternion normalized() const;
  UnitQuaternion conjugate() const { return {w, -x, -y, -z}; }
  // Canonical representative of the double cover (w >= 0).
  UnitQuaternion canonical() const { return w < 0.0 ? UnitQuaternion{-w, -x, -y, -z} : *this; }

  static UnitQuaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static UnitQuaternion from_axis_angle(double ax, double ay, double az, double angle);
};

UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b);
void quat_rotate(const UnitQuaternion& q, double vx, double vy, double vz,
                 double* ox, double* oy, double* oz);
// Geodesic angle between two orientations, in [0, pi].
double quat_angle(const UnitQuaternion& a, const UnitQuaternion& b);
UnitQuaternion quat_slerp(const UnitQuaternion& a, const UnitQuaternion& b, double t);

Multivector embed(const Scalar& s);
Multivector embed(const Direction& d);
Multivector embed(const Point& p);
// Throws std::invalid_argument when |q| deviates from 1 by more than 1e-6.
Multivector embed(const UnitQuaternion& q);

template <class Entity>
Entity extract(const Multivector& mv);

// Scalar: the grade-0 coefficient.
template <>
Scalar extract<Scalar>(const Multivector& mv);
// Direction: the e1..e3 coefficients.
template <>
Direction extract<Direction>(const Multivector& mv);
// Point: divides by the homogeneous e123 weight; throws std::domain_error
// when |weight| < 1e-9 (point at infinity).
template <>
Point extract<Point>(const Multivector& mv);
// Quaternion: normalizes the {1, e12, e13, e23} part; throws
// std::domain_error when its norm is < 1e-9.
template <>
UnitQuaternion extract<UnitQuaternion>(const Multivector& mv);

}  // namespace hpga::pga

#endif  // HPGA_PGA_ENTITIES_HPP_
