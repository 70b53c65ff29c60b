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

#include "hpga/pga/versor.hpp"

#include <stdexcept>

namespace hpga::pga {

Versor::Versor(const Multivector& mv) : mv_(mv) {
  for (int i = 0; i < kNumBlades; ++i) {
    if (kGrade[i] % 2 != 0 && mv[i] != 0.0) {
      throw std::domain_error("Versor: odd-grade component present");
    }
  }
  Multivector unit = geometric_product(mv_, reverse(mv_)) - Multivector::scalar(1.0);
  if (unit.frobenius_norm() > 1e-6) {
    throw std::domain_error("Versor: v * reverse(v) != 1 (non-unit versor)");
  }
}

Versor Versor::rotor(double ax, double ay, double az, double angle) {
  return Versor(embed(UnitQuaternion::from_axis_angle(ax, ay, az, angle)));
}

Versor Versor::translator(double dx, double dy, double dz) {
  // With the dual point form, 1 + (d/2)e0i moves points by -d along axis i
  // (pinned by the coordinate oracle test), hence the minus signs here.
  Multivector m = Multivector::scalar(1.0);
  m[kE01] = -0.5 * dx;
  m[kE02] = -0.5 * dy;
  m[kE03] = -0.5 * dz;
  return Versor(m);
}

Multivector sandwich(const Versor& v, const Multivector& a) {
  return geometric_product(geometric_product(v.mv(), a), reverse(v.mv()));
}

}  // namespace hpga::pga
