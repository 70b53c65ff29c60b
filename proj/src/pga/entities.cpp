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

#include "hpga/pga/entities.hpp"

#include <algorithm>
#include <stdexcept>

namespace hpga::pga {

UnitQuaternion UnitQuaternion::normalized() const {
  double n = norm();
  if (n < 1e-12) throw std::domain_error("quaternion norm too small to normalize");
  return {w / n, x / n, y / n, z / n};
}

UnitQuaternion UnitQuaternion::from_axis_angle(double ax, double ay, double az,
                                               double angle) {
  double n = std::sqrt(ax * ax + ay * ay + az * az);
  if (n < 1e-12) return identity();
  double s = std::sin(0.5 * angle) / n;
  return {std::cos(0.5 * angle), ax * s, ay * s, az * s};
}

UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

void quat_rotate(const UnitQuaternion& q, double vx, double vy, double vz,
                 double* ox, double* oy, double* oz) {
  // v' = q v q*, expanded.
  UnitQuaternion v{0.0, vx, vy, vz};
  UnitQuaternion r = quat_multiply(quat_multiply(q, v), q.conjugate());
  *ox = r.x;
  *oy = r.y;
  *oz = r.z;
}

double quat_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
  double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  dot = std::clamp(std::abs(dot), 0.0, 1.0);
  return 2.0 * std::acos(dot);
}

UnitQuaternion quat_slerp(const UnitQuaternion& a, const UnitQuaternion& bin, double t) {
  UnitQuaternion b = bin;
  double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  if (dot < 0.0) {  // take the short arc
    b = {-b.w, -b.x, -b.y, -b.z};
    dot = -dot;
  }
  dot = std::min(dot, 1.0);
  double theta = std::acos(dot);
  if (theta < 1e-9) {
    UnitQuaternion r{a.w + t * (b.w - a.w), a.x + t * (b.x - a.x),
                     a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
    return r.normalized();
  }
  double sa = std::sin((1.0 - t) * theta) / std::sin(theta);
  double sb = std::sin(t * theta) / std::sin(theta);
  UnitQuaternion r{sa * a.w + sb * b.w, sa * a.x + sb * b.x, sa * a.y + sb * b.y,
                   sa * a.z + sb * b.z};
  return r.normalized();
}

Multivector embed(const Scalar& s) { return Multivector::scalar(s.value); }

Multivector embed(const Direction& d) {
  Multivector m;
  m[kE1] = d.x;
  m[kE2] = d.y;
  m[kE3] = d.z;
  return m;
}

Multivector embed(const Point& p) {
  Multivector m;
  m[kE012] = -p.z;
  m[kE013] = p.y;
  m[kE023] = -p.x;
  m[kE123] = 1.0;
  return m;
}

Multivector embed(const UnitQuaternion& q) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("embed: quaternion is not unit norm");
  }
  Multivector m;
  m[kS] = q.w;
  m[kE12] = -q.z;
  m[kE13] = q.y;
  m[kE23] = -q.x;
  return m;
}

template <>
Scalar extract<Scalar>(const Multivector& mv) {
  return {mv[kS]};
}

template <>
Direction extract<Direction>(const Multivector& mv) {
  return {mv[kE1], mv[kE2], mv[kE3]};
}

template <>
Point extract<Point>(const Multivector& mv) {
  double w = mv[kE123];
  if (std::abs(w) < 1e-9) {
    throw std::domain_error("extract<Point>: homogeneous weight ~0 (point at infinity)");
  }
  return {-mv[kE023] / w, mv[kE013] / w, -mv[kE012] / w};
}

template <>
UnitQuaternion extract<UnitQuaternion>(const Multivector& mv) {
  UnitQuaternion q{mv[kS], -mv[kE23], mv[kE13], -mv[kE12]};
  double n = q.norm();
  if (n < 1e-9) {
    throw std::domain_error("extract<UnitQuaternion>: degenerate orientation (norm ~0)");
  }
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

}  // namespace hpga::pga
