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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <stdexcept>

#include "doctest.h"
#include "hpga/pga/entities.hpp"
#include "hpga/pga/multivector.hpp"
#include "hpga/pga/versor.hpp"
#include "oracles.hpp"

using namespace hpga;
using namespace hpga::pga;
using hpga::testing::oracle_blade_index;
using hpga::testing::oracle_blade_product;
using hpga::testing::oracle_index_list;
using hpga::testing::oracle_product;
using hpga::testing::random_multivector;
using hpga::testing::random_quaternion;

namespace {

double mv_dist(const Multivector& a, const Multivector& b) {
  return (a - b).frobenius_norm();
}

Versor random_motion(Rng& rng) {
  Versor r = Versor::rotor(rng.normal(), rng.normal(), rng.normal(), rng.uniform(-3.0, 3.0));
  Versor t = Versor::translator(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                rng.uniform(-1.0, 1.0));
  return t * r;
}

}  // namespace

TEST_CASE("cayley table matches the symbolic blade oracle on all 256 entries") {
  for (int i = 0; i < kNumBlades; ++i) {
    for (int j = 0; j < kNumBlades; ++j) {
      auto r = oracle_blade_product(oracle_index_list(i), oracle_index_list(j), false);
      const BladeProduct& p = kGeometricTable[i][j];
      if (r.sign == 0) {
        CHECK(p.sign == 0);
      } else {
        REQUIRE(p.sign == r.sign);
        REQUIRE(static_cast<int>(p.index) == oracle_blade_index(r.indices));
      }
    }
  }
}

TEST_CASE("wedge table matches the symbolic oracle on all 256 entries") {
  for (int i = 0; i < kNumBlades; ++i) {
    for (int j = 0; j < kNumBlades; ++j) {
      auto r = oracle_blade_product(oracle_index_list(i), oracle_index_list(j), true);
      const BladeProduct& p = kWedgeTable[i][j];
      if (r.sign == 0) {
        CHECK(p.sign == 0);
      } else {
        REQUIRE(p.sign == r.sign);
        REQUIRE(static_cast<int>(p.index) == oracle_blade_index(r.indices));
      }
    }
  }
}

TEST_CASE("cayley table spot checks") {
  struct Spot {
    int a, b, target, sign;  // target -1 means zero
  };
  // Entries read off the standard 3D PGA multiplication table.
  const Spot spots[] = {
      {kE1, kE1, kS, 1},        {kE0, kE0, -1, 0},
      {kE1, kE2, kE12, 1},      {kE2, kE1, kE12, -1},
      {kE12, kE12, kS, -1},     {kE123, kE123, kS, -1},
      {kE0123, kE0123, -1, 0},  {kE0, kE123, kE0123, 1},
      {kE12, kE23, kE13, 1},    {kE2, kE12, kE1, -1},
  };
  for (const Spot& s : spots) {
    const BladeProduct& p = kGeometricTable[s.a][s.b];
    if (s.target < 0) {
      CHECK(p.sign == 0);
    } else {
      CHECK(static_cast<int>(p.index) == s.target);
      CHECK(static_cast<int>(p.sign) == s.sign);
    }
  }
}

TEST_CASE("geometric product basics and random agreement with the oracle") {
  CHECK(geometric_product(Multivector::basis(kE1), Multivector::basis(kE1))[kS] == 1.0);

  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Multivector a = random_multivector(rng);
    Multivector b = random_multivector(rng);
    CHECK(mv_dist(geometric_product(Multivector::scalar(1.0), a), a) == 0.0);
    CHECK(mv_dist(geometric_product(a, b), oracle_product(a, b, false)) < 1e-12);
  }
}

TEST_CASE("outer product: antisymmetry, nilpotency, distributivity") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    Multivector x;  // a random grade-1 vector
    for (int i = kE0; i <= kE3; ++i) x[i] = rng.normal();
    Multivector zero = outer_product(x, x);
    // fused multiply-adds keep the symmetric terms from cancelling bitwise
    CHECK(zero.frobenius_norm() < 1e-15);
  }
  Multivector e1 = Multivector::basis(kE1), e2 = Multivector::basis(kE2);
  CHECK(mv_dist(outer_product(e1, e2), Multivector::basis(kE12)) == 0.0);
  CHECK(mv_dist(outer_product(e2, e1), Multivector::basis(kE12, -1.0)) == 0.0);
  CHECK(mv_dist(outer_product(e1 + e2, e2), Multivector::basis(kE12)) == 0.0);

  // grade-raising: for basis blades the wedge is the grade-(j+k) part of the
  // geometric product
  for (int i = 0; i < kNumBlades; ++i) {
    for (int j = 0; j < kNumBlades; ++j) {
      int gsum = kGrade[i] + kGrade[j];
      Multivector w = outer_product(Multivector::basis(i), Multivector::basis(j));
      if (gsum > 4) {
        CHECK(w.frobenius_norm() == 0.0);
      } else {
        Multivector g = grade_project(
            geometric_product(Multivector::basis(i), Multivector::basis(j)), gsum);
        CHECK(mv_dist(w, g) == 0.0);
      }
    }
  }
}

TEST_CASE("invariant inner product") {
  Multivector e1 = Multivector::basis(kE1);
  CHECK(inner_product_invariant(e1, e1) == 1.0);
  Multivector e01 = Multivector::basis(kE01);
  CHECK(inner_product_invariant(e01, e01) == 0.0);

  Rng rng(13);
  Multivector x = random_multivector(rng);
  double expect = 0.0;
  for (int i = 0; i < kNumBlades; ++i) {
    if (kEuclideanBlade[i]) expect += x[i] * x[i];
  }
  CHECK(inner_product_invariant(x, x) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("dual convention: blade ^ dual(blade) = +e0123, and double dual signs") {
  for (int i = 0; i < kNumBlades; ++i) {
    Multivector b = Multivector::basis(i);
    Multivector w = outer_product(b, dual(b));
    CHECK(w[kE0123] == 1.0);
    for (int m = 0; m < kNumBlades - 1; ++m) CHECK(w[m] == 0.0);
  }
  CHECK(mv_dist(dual(Multivector::scalar(1.0)), Multivector::basis(kE0123)) == 0.0);

  // dual(dual(b)) = +-b with the sign enumerated via the oracle-backed wedge:
  // swapping complementary blocks of sizes k and 4-k costs k(4-k) swaps.
  for (int i = 0; i < kNumBlades; ++i) {
    Multivector dd = dual(dual(Multivector::basis(i)));
    int k = kGrade[i];
    double expect_sign = ((k * (4 - k)) % 2 == 0) ? 1.0 : -1.0;
    CHECK(dd[i] == expect_sign);
  }
}

TEST_CASE("join: pseudoscalar identity, line through two points, nilpotency") {
  Rng rng(14);
  Multivector x = random_multivector(rng);
  // join(x, e0123) = dual(dual(x) ^ 1) = dual(dual(x)): per-grade parity sign
  Multivector j = join(x, Multivector::basis(kE0123));
  for (int i = 0; i < kNumBlades; ++i) {
    double s = ((kGrade[i] * (4 - kGrade[i])) % 2 == 0) ? 1.0 : -1.0;
    CHECK(j[i] == doctest::Approx(s * x[i]).epsilon(1e-14));
  }

  // two distinct points join to a grade-2 carrier (their line)
  Multivector p0 = embed(Point{0, 0, 0});
  Multivector p1 = embed(Point{1, 0, 0});
  Multivector line = join(p0, p1);
  Multivector expect_line = dual(outer_product(dual(p0), dual(p1)));
  CHECK(mv_dist(line, expect_line) == 0.0);
  CHECK(line.frobenius_norm() > 0.0);
  for (int i = 0; i < kNumBlades; ++i) {
    if (kGrade[i] != 2) CHECK(line[i] == 0.0);
  }

  CHECK(join(p0, p0).frobenius_norm() == 0.0);
}

TEST_CASE("reversion") {
  CHECK(reverse(Multivector::basis(kE12))[kE12] == -1.0);
  CHECK(reverse(Multivector::basis(kE1))[kE1] == 1.0);
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    Multivector a = random_multivector(rng);
    Multivector b = random_multivector(rng);
    Multivector lhs = reverse(geometric_product(a, b));
    Multivector rhs = geometric_product(reverse(b), reverse(a));
    CHECK(mv_dist(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("grade projection") {
  Rng rng(16);
  Multivector x = random_multivector(rng);
  Multivector s = grade_project(x, 0);
  CHECK(s[kS] == x[kS]);
  for (int i = 1; i < kNumBlades; ++i) CHECK(s[i] == 0.0);

  Multivector sum;
  for (int k = 0; k <= 4; ++k) sum += grade_project(x, k);
  CHECK(mv_dist(sum, x) == 0.0);

  for (int k = 0; k <= 4; ++k) {
    CHECK(mv_dist(grade_project(grade_project(x, k), k), grade_project(x, k)) == 0.0);
  }

  CHECK_THROWS_AS(grade_project(x, 5), std::invalid_argument);
  CHECK_THROWS_AS(grade_project(x, -1), std::invalid_argument);
}

TEST_CASE("degenerate metric: e0-supported operands multiply to exactly zero") {
  Rng rng(17);
  Multivector a, b;
  for (int i = 0; i < kNumBlades; ++i) {
    if (!kEuclideanBlade[i]) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
  }
  CHECK(geometric_product(a, b).frobenius_norm() == 0.0);
}

TEST_CASE("associativity and distributivity on random samples") {
  Rng rng(18);
  for (int trial = 0; trial < 100; ++trial) {
    Multivector a = random_multivector(rng);
    Multivector b = random_multivector(rng);
    Multivector c = random_multivector(rng);
    CHECK(mv_dist(geometric_product(a, geometric_product(b, c)),
                  geometric_product(geometric_product(a, b), c)) < 1e-10);
    CHECK(mv_dist(geometric_product(a, b + c),
                  geometric_product(a, b) + geometric_product(a, c)) < 1e-12);
    CHECK(mv_dist(outer_product(a, b + c), outer_product(a, b) + outer_product(a, c)) <
          1e-12);
  }
}

TEST_CASE("sandwich: identity, rotor vs quaternion oracle, translator sign") {
  Rng rng(19);
  Multivector x = random_multivector(rng);
  CHECK(mv_dist(sandwich(Versor::identity(), x), x) == 0.0);

  // quarter turn about +z
  double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
  Multivector rmv = Multivector::scalar(c);
  rmv[kE12] = -s;
  Versor r(rmv);
  Point p = extract<Point>(sandwich(r, embed(Point{1, 0, 0})));
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.z == doctest::Approx(0.0).epsilon(1e-12));

  // random rotors agree with the quaternion rotation oracle
  for (int trial = 0; trial < 100; ++trial) {
    UnitQuaternion q = random_quaternion(rng);
    Point in{rng.normal(), rng.normal(), rng.normal()};
    Point out = extract<Point>(sandwich(Versor::rotor(q), embed(in)));
    double ox, oy, oz;
    quat_rotate(q, in.x, in.y, in.z, &ox, &oy, &oz);
    CHECK(out.x == doctest::Approx(ox).epsilon(1e-10));
    CHECK(out.y == doctest::Approx(oy).epsilon(1e-10));
    CHECK(out.z == doctest::Approx(oz).epsilon(1e-10));
  }

  // empirical sign: 1 + (d/2)e0i shifts points by -d along axis i
  double d = 0.75;
  Multivector tmv = Multivector::scalar(1.0);
  tmv[kE01] = 0.5 * d;
  Point shifted = extract<Point>(sandwich(Versor(tmv), embed(Point{1, 2, 3})));
  CHECK(shifted.x == doctest::Approx(1.0 - d).epsilon(1e-12));
  CHECK(shifted.y == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(shifted.z == doctest::Approx(3.0).epsilon(1e-12));

  // the public constructor therefore flips the sign: +d along each axis
  Point moved = extract<Point>(sandwich(Versor::translator(0.1, -0.2, 0.3), embed(Point{1, 2, 3})));
  CHECK(moved.x == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(moved.y == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(moved.z == doctest::Approx(3.3).epsilon(1e-12));

  // non-unit versor rejected
  CHECK_THROWS_AS(Versor{Multivector::scalar(2.0)}, std::domain_error);
  Multivector odd = Multivector::basis(kE1);
  CHECK_THROWS_AS(Versor{odd}, std::domain_error);
}

TEST_CASE("sandwich preserves the invariant inner product") {
  Rng rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    Versor v = random_motion(rng);
    Multivector x = random_multivector(rng);
    Multivector y = sandwich(v, x);
    CHECK(inner_product_invariant(y, y) ==
          doctest::Approx(inner_product_invariant(x, x)).epsilon(1e-9));
  }
}

TEST_CASE("embed formulas, exact") {
  Multivector p = embed(Point{1, 2, 3});
  CHECK(p[kE012] == -3.0);
  CHECK(p[kE013] == 2.0);
  CHECK(p[kE023] == -1.0);
  CHECK(p[kE123] == 1.0);
  int nonzero = 0;
  for (int i = 0; i < kNumBlades; ++i) nonzero += (p[i] != 0.0);
  CHECK(nonzero == 4);

  Multivector qid = embed(UnitQuaternion::identity());
  CHECK(mv_dist(qid, Multivector::scalar(1.0)) == 0.0);

  UnitQuaternion q = UnitQuaternion{0.5, 0.5, 0.5, 0.5};
  Multivector qm = embed(q);
  CHECK(qm[kS] == 0.5);
  CHECK(qm[kE12] == -0.5);
  CHECK(qm[kE13] == 0.5);
  CHECK(qm[kE23] == -0.5);

  Multivector dm = embed(Direction{4, 5, 6});
  CHECK(dm[kE1] == 4.0);
  CHECK(dm[kE2] == 5.0);
  CHECK(dm[kE3] == 6.0);

  CHECK(embed(Scalar{2.5})[kS] == 2.5);

  CHECK_THROWS_AS(embed(UnitQuaternion{1.0, 0.5, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("extract: roundtrips, homogeneous rescaling, degenerate errors") {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    Point p{rng.normal(), rng.normal(), rng.normal()};
    Point pr = extract<Point>(embed(p));
    CHECK(std::abs(pr.x - p.x) <= 1e-12);
    CHECK(std::abs(pr.y - p.y) <= 1e-12);
    CHECK(std::abs(pr.z - p.z) <= 1e-12);

    UnitQuaternion q = random_quaternion(rng);
    UnitQuaternion qr = extract<UnitQuaternion>(embed(q));
    CHECK(std::abs(qr.w - q.w) <= 1e-12);
    CHECK(std::abs(qr.x - q.x) <= 1e-12);
    CHECK(std::abs(qr.y - q.y) <= 1e-12);
    CHECK(std::abs(qr.z - q.z) <= 1e-12);

    Direction dd{rng.normal(), rng.normal(), rng.normal()};
    Direction dr = extract<Direction>(embed(dd));
    CHECK(dr.x == dd.x);
    CHECK(dr.y == dd.y);
    CHECK(dr.z == dd.z);

    Scalar sc{rng.normal()};
    CHECK(extract<Scalar>(embed(sc)).value == sc.value);
  }

  Point p{0.4, -0.7, 1.9};
  Point scaled = extract<Point>(embed(p) * 2.0);
  CHECK(scaled.x == doctest::Approx(p.x).epsilon(1e-14));
  CHECK(scaled.y == doctest::Approx(p.y).epsilon(1e-14));
  CHECK(scaled.z == doctest::Approx(p.z).epsilon(1e-14));

  // orientation channel scaled by 2 still extracts the unit quaternion
  UnitQuaternion q{0.5, -0.5, 0.5, -0.5};
  UnitQuaternion qs = extract<UnitQuaternion>(embed(q) * 2.0);
  CHECK(qs.w == doctest::Approx(q.w).epsilon(1e-14));
  CHECK(qs.x == doctest::Approx(q.x).epsilon(1e-14));

  Multivector at_infinity = embed(Direction{1, 0, 0});
  CHECK_THROWS_AS(extract<Point>(at_infinity), std::domain_error);
  CHECK_THROWS_AS(extract<UnitQuaternion>(Multivector::basis(kE0)), std::domain_error);
}
