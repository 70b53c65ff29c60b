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

#include "hpga/pga/multivector.hpp"

#include <sstream>
#include <stdexcept>

namespace hpga::pga {

namespace {

const char* kBladeName[kNumBlades] = {
    "1",    "e0",   "e1",   "e2",   "e3",   "e01",  "e02",  "e03",
    "e12",  "e13",  "e23",  "e012", "e013", "e023", "e123", "e0123"};

Multivector expand(const ProductTable& table, const Multivector& a,
                   const Multivector& b) {
  Multivector out;
  for (int i = 0; i < kNumBlades; ++i) {
    double ai = a[i];
    if (ai == 0.0) continue;
    for (int j = 0; j < kNumBlades; ++j) {
      const BladeProduct& p = table[i][j];
      if (p.sign == 0) continue;
      out[p.index] += p.sign * ai * b[j];
    }
  }
  return out;
}

}  // namespace

std::string Multivector::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < kNumBlades; ++i) {
    if (c_[i] == 0.0) continue;
    if (!first) os << " + ";
    os << c_[i] << "*" << kBladeName[i];
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

Multivector geometric_product(const Multivector& a, const Multivector& b) {
  return expand(kGeometricTable, a, b);
}

Multivector outer_product(const Multivector& a, const Multivector& b) {
  return expand(kWedgeTable, a, b);
}

double inner_product_invariant(const Multivector& a, const Multivector& b) {
  double s = 0.0;
  for (int i = 0; i < kNumBlades; ++i) {
    if (kEuclideanBlade[i]) s += a[i] * b[i];
  }
  return s;
}

Multivector dual(const Multivector& a) {
  Multivector out;
  for (int i = 0; i < kNumBlades; ++i) {
    const DualEntry& d = kDualTable[i];
    out[d.index] = d.sign * a[i];
  }
  return out;
}

Multivector join(const Multivector& a, const Multivector& b) {
  return expand(kJoinTable, a, b);
}

Multivector reverse(const Multivector& a) {
  Multivector out;
  for (int i = 0; i < kNumBlades; ++i) out[i] = kReverseSign[i] * a[i];
  return out;
}

Multivector grade_project(const Multivector& a, int k) {
  if (k < 0 || k > 4) {
    throw std::invalid_argument("grade_project: grade must be in 0..4, got " +
                                std::to_string(k));
  }
  Multivector out;
  for (int i = 0; i < kNumBlades; ++i) {
    if (kGrade[i] == k) out[i] = a[i];
  }
  return out;
}

}  // namespace hpga::pga
