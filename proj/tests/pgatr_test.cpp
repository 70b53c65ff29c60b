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
#include <cmath>

#include "doctest.h"
#include "hpga/ad/gradcheck.hpp"
#include "hpga/net/pgatr.hpp"
#include "hpga/pga/versor.hpp"
#include "oracles.hpp"

using namespace hpga;
using namespace hpga::ad;
using namespace hpga::net;
using pga::Versor;

namespace {

Versor random_motion(Rng& rng) {
  Versor r = Versor::rotor(rng.normal(), rng.normal(), rng.normal(), rng.uniform(-3.0, 3.0));
  Versor t = Versor::translator(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                rng.uniform(-1.0, 1.0));
  return t * r;
}

// Applies the rigid motion to every multivector in a (...,16) stack.
Tensor sandwich_stack(const Versor& v, const Tensor& x) {
  Tensor out(x.shape());
  int64_t cells = x.numel() / 16;
  for (int64_t c = 0; c < cells; ++c) {
    pga::Multivector m;
    for (int i = 0; i < 16; ++i) m[i] = x[c * 16 + i];
    pga::Multivector r = pga::sandwich(v, m);
    for (int i = 0; i < 16; ++i) out[c * 16 + i] = r[i];
  }
  return out;
}

double frob_dist(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Equivariance defect of a recorded map: ||L(rho x) - rho L(x)|| vs the spec
// bound 1e-5 * (1 + ||L(x)||).
void check_equivariance(Tape& t, int x_leaf, int out, int n_motions, Rng& rng) {
  Tensor x0 = t.value(x_leaf);
  Tensor y0 = t.value(out);
  for (int trial = 0; trial < n_motions; ++trial) {
    Versor v = random_motion(rng);
    t.set_leaf(x_leaf, sandwich_stack(v, x0));
    t.replay();
    double err = frob_dist(t.value(out), sandwich_stack(v, y0));
    CHECK(err <= 1e-5 * (1.0 + y0.frobenius_norm()));
  }
  t.set_leaf(x_leaf, x0);
  t.replay();
}

}  // namespace

TEST_CASE("equi_linear: identity weights, e0 junction, equivariance") {
  Rng rng(41);
  // w_k = 1, v_k = 0 on a single channel acts as the identity
  ModelParams p;
  int g = p.add_group("net");
  ParamRef w = p.add_param(g, "w", Tensor::full({1, 1, 5}, 1.0));
  ParamRef v = p.add_param(g, "v", Tensor::zeros({1, 1, 4}));
  Tape t;
  int x = t.leaf(Tensor::randn({1, 3, 1, 16}, rng));
  int y = equi_linear(t, x, t.param(p, w), t.param(p, v));
  for (int64_t i = 0; i < t.value(x).numel(); ++i) CHECK(t.value(y)[i] == t.value(x)[i]);

  // only v_0 = c: a scalar input s maps to c*s*e0
  ModelParams p2;
  int g2 = p2.add_group("net");
  ParamRef w2 = p2.add_param(g2, "w", Tensor::zeros({1, 1, 5}));
  Tensor vv = Tensor::zeros({1, 1, 4});
  vv[0] = 2.5;
  ParamRef v2 = p2.add_param(g2, "v", vv);
  Tape t2;
  Tensor xin = Tensor::zeros({1, 1, 1, 16});
  xin[0] = 3.0;  // scalar s
  int x2 = t2.leaf(xin);
  int y2 = equi_linear(t2, x2, t2.param(p2, w2), t2.param(p2, v2));
  CHECK(t2.value(y2)[pga::kE0] == 7.5);
  for (int i = 0; i < 16; ++i) {
    if (i != pga::kE0) CHECK(t2.value(y2)[i] == 0.0);
  }

  // equivariance with random parameters
  ModelParams p3;
  int g3 = p3.add_group("net");
  EquiLinear lin = make_equi_linear(p3, g3, "lin", 3, 3, rng);
  Tape t3;
  int x3 = t3.leaf(Tensor::randn({1, 4, 3, 16}, rng));
  int y3 = apply_equi_linear(t3, p3, lin, x3);
  check_equivariance(t3, x3, y3, 100, rng);
}

TEST_CASE("geometric bilinear halves: scalar and pseudoscalar identities") {
  Rng rng(42);
  Tensor xv = Tensor::randn({1, 2, 2, 16}, rng);

  // y = scalar 1: the geometric-product half is x itself
  Tensor ones = Tensor::zeros({1, 2, 2, 16});
  for (int64_t c = 0; c < ones.numel() / 16; ++c) ones[c * 16] = 1.0;
  Tape t;
  int x = t.leaf(xv);
  int y = t.leaf(ones);
  int gp = pga_geometric(t, x, y);
  for (int64_t i = 0; i < xv.numel(); ++i) CHECK(t.value(gp)[i] == xv[i]);

  // y = e0123: the join half is x up to the per-grade double-dual sign
  Tensor pss = Tensor::zeros({1, 2, 2, 16});
  for (int64_t c = 0; c < pss.numel() / 16; ++c) pss[c * 16 + pga::kE0123] = 1.0;
  Tape t2;
  int x2 = t2.leaf(xv);
  int y2 = t2.leaf(pss);
  int jn = pga_join(t2, x2, y2);
  for (int64_t c = 0; c < xv.numel() / 16; ++c) {
    for (int m = 0; m < 16; ++m) {
      int k = pga::kGrade[m];
      double sign = ((k * (4 - k)) % 2 == 0) ? 1.0 : -1.0;
      CHECK(t2.value(jn)[c * 16 + m] == doctest::Approx(sign * xv[c * 16 + m]));
    }
  }
}

TEST_CASE("geometric bilinear layer: equivariance under rigid motions") {
  Rng rng(43);
  ModelParams p;
  int g = p.add_group("net");
  GeometricBilinear bil = make_geometric_bilinear(p, g, "bil", 3, rng);
  Tape t;
  Tensor x0 = Tensor::randn({1, 3, 3, 16}, rng);
  int x = t.leaf(x0);
  // x doubles as operand pair and reference, mirroring the block wiring
  int h1 = pga_geometric(t, x, x);  // warm the tape with an extra op to vary shapes
  (void)h1;
  int left = x;
  int out = apply_geometric_bilinear(t, p, bil, left, identity_op(t, x), x);
  check_equivariance(t, x, out, 100, rng);
}

TEST_CASE("mv_attention: single token, tied keys, invariant weights") {
  Rng rng(44);
  // one token: softmax weight 1, output equals v
  Tape t;
  int q = t.leaf(Tensor::randn({1, 1, 2, 16}, rng));
  int k = t.leaf(Tensor::randn({1, 1, 2, 16}, rng));
  Tensor vv = Tensor::randn({1, 1, 2, 16}, rng);
  int v = t.leaf(vv);
  int out = mv_attention(t, q, k, v, 2);
  for (int64_t i = 0; i < vv.numel(); ++i) CHECK(t.value(out)[i] == doctest::Approx(vv[i]));

  // two identical keys: output is the mean of the two values
  Tape t2;
  Tensor kv = Tensor::randn({1, 2, 2, 16}, rng);
  for (int c = 0; c < 2; ++c)
    for (int m = 0; m < 16; ++m) kv.at(0, 1, c, m) = kv.at(0, 0, c, m);
  int q2 = t2.leaf(Tensor::randn({1, 2, 2, 16}, rng));
  int k2 = t2.leaf(kv);
  Tensor v2v = Tensor::randn({1, 2, 2, 16}, rng);
  int v2 = t2.leaf(v2v);
  int out2 = mv_attention(t2, q2, k2, v2, 1);
  for (int c = 0; c < 2; ++c)
    for (int m = 0; m < 16; ++m) {
      double mean = 0.5 * (v2v.at(0, 0, c, m) + v2v.at(0, 1, c, m));
      CHECK(t2.value(out2).at(0, 0, c, m) == doctest::Approx(mean).epsilon(1e-12));
      CHECK(t2.value(out2).at(0, 1, c, m) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("mv_attention: weights are invariant under a common rigid motion") {
  Rng rng(45);
  const int T = 4, C = 4, H = 2;
  Tensor q0 = Tensor::randn({1, T, C, 16}, rng);
  Tensor k0 = Tensor::randn({1, T, C, 16}, rng);

  // Probe the weight matrix by one-hot value tokens: with v_j = delta_j
  // (scalar slot 1 on every channel), out[i', c, 0] = w_h(c)[i', j].
  auto probe_weights = [&](const Tensor& qv, const Tensor& kv) {
    Tensor w({C, T, T});
    Tape t;
    int q = t.leaf(qv);
    int k = t.leaf(kv);
    int v = t.leaf(Tensor::zeros({1, T, C, 16}));
    int out = mv_attention(t, q, k, v, H);
    for (int j = 0; j < T; ++j) {
      Tensor onehot = Tensor::zeros({1, T, C, 16});
      for (int c = 0; c < C; ++c) onehot.at(0, j, c, 0) = 1.0;
      t.set_leaf(v, onehot);
      t.replay();
      for (int c = 0; c < C; ++c)
        for (int i = 0; i < T; ++i) w.at(c, i, j) = t.value(out).at(0, i, c, 0);
    }
    return w;
  };

  Tensor w_base = probe_weights(q0, k0);
  for (int trial = 0; trial < 20; ++trial) {
    Versor m = random_motion(rng);
    Tensor w_moved = probe_weights(sandwich_stack(m, q0), sandwich_stack(m, k0));
    for (int64_t i = 0; i < w_base.numel(); ++i) {
      CHECK(std::abs(w_base[i] - w_moved[i]) <= 1e-6);
    }
  }
}

TEST_CASE("gated_gelu: zero gate, open gate, equivariance") {
  Rng rng(46);
  Tensor xv = Tensor::randn({1, 1, 1, 16}, rng);
  xv[0] = 0.0;
  Tape t;
  int y = gated_gelu(t, t.leaf(xv));
  for (int i = 0; i < 16; ++i) CHECK(t.value(y)[i] == 0.0);

  // far into the positive tail the gate saturates to the scalar part itself:
  // GELU(10) = 10 within 1e-3 relative, so the output is 10*x
  xv[0] = 10.0;
  Tape t2;
  int y2 = gated_gelu(t2, t2.leaf(xv));
  CHECK(gelu_value(10.0) == doctest::Approx(10.0).epsilon(1e-3));
  for (int i = 0; i < 16; ++i) {
    CHECK(t2.value(y2)[i] == doctest::Approx(10.0 * xv[i]).epsilon(1e-3));
  }

  Tape t3;
  int x3 = t3.leaf(Tensor::randn({1, 3, 2, 16}, rng));
  int y3 = gated_gelu(t3, x3);
  check_equivariance(t3, x3, y3, 100, rng);
}

TEST_CASE("equi_layernorm: unit norm, homogeneity, degenerate input") {
  Rng rng(47);
  const int C = 4;
  Tape t;
  Tensor xv = Tensor::randn({1, 2, C, 16}, rng);
  int x = t.leaf(xv);
  int y = equi_layernorm(t, x);
  for (int ti = 0; ti < 2; ++ti) {
    double norm = 0.0;
    for (int c = 0; c < C; ++c)
      for (int m = 0; m < 16; ++m) {
        if (pga::kEuclideanBlade[m]) {
          double v = t.value(y).at(0, ti, c, m);
          norm += v * v;
        }
      }
    CHECK(norm / C == doctest::Approx(1.0).epsilon(1e-6));
  }

  // homogeneity: LN(3x) = LN(x) up to eps effects
  Tensor x3(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) x3[i] = 3.0 * xv[i];
  t.set_leaf(x, x3);
  t.replay();
  Tensor y3 = t.value(y);
  t.set_leaf(x, xv);
  t.replay();
  for (int64_t i = 0; i < y3.numel(); ++i) {
    CHECK(y3[i] == doctest::Approx(t.value(y)[i]).epsilon(1e-7));
  }

  // input supported only on e0 blades: scaled by 1/sqrt(eps), finite
  Tensor degen = Tensor::zeros({1, 1, 1, 16});
  degen[pga::kE0] = 2.0;
  degen[pga::kE01] = -1.0;
  Tape t4;
  int y4 = equi_layernorm(t4, t4.leaf(degen));
  CHECK(t4.value(y4).all_finite());
  CHECK(t4.value(y4)[pga::kE0] == doctest::Approx(2.0 / std::sqrt(1e-8)));

  Tape t5;
  int x5 = t5.leaf(Tensor::randn({1, 3, C, 16}, rng));
  int y5 = equi_layernorm(t5, x5);
  check_equivariance(t5, x5, y5, 100, rng);
}

TEST_CASE("pgatr block: shape contract, identity at init, equivariance") {
  Rng rng(48);
  ModelParams p;
  int g = p.add_group("net");
  PgatrConfig cfg;
  cfg.channels = 8;
  cfg.n_heads = 4;
  PgatrBlock blk = make_pgatr_block(p, g, "blk", cfg, rng);

  Tape t;
  Tensor xv = Tensor::randn({2, 5, 8, 16}, rng);
  int x = t.leaf(xv);
  int y = apply_pgatr_block(t, p, blk, x);
  CHECK(t.value(y).shape() == xv.shape());

  // both residual-branch output projections are zero at init
  for (int64_t i = 0; i < xv.numel(); ++i) CHECK(t.value(y)[i] == xv[i]);

  // perturb the zero-initialized projections, then test equivariance
  ModelParams p2;
  int g2 = p2.add_group("net");
  PgatrBlock blk2 = make_pgatr_block(p2, g2, "blk2", cfg, rng);
  p2.set(blk2.attn_out.w, Tensor::randn({8, 8, 5}, rng, 0.3));
  p2.set(blk2.attn_out.v, Tensor::randn({8, 8, 4}, rng, 0.3));
  p2.set(blk2.mlp_out.w, Tensor::randn({8, 8, 5}, rng, 0.3));
  p2.set(blk2.mlp_out.v, Tensor::randn({8, 8, 4}, rng, 0.3));
  Tape t2;
  int x2 = t2.leaf(Tensor::randn({1, 5, 8, 16}, rng));
  int y2 = apply_pgatr_block(t2, p2, blk2, x2);
  check_equivariance(t2, x2, y2, 50, rng);
}

TEST_CASE("pgatr net: shape, determinism, end-to-end equivariance") {
  Rng rng(49);
  ModelParams p;
  int g = p.add_group("encoder");
  PgatrConfig cfg;
  cfg.n_blocks = 4;
  cfg.channels = 16;
  cfg.n_heads = 4;
  PgatrNet net = make_pgatr_net(p, g, "enc", cfg, 2, 5, rng);
  // wake the zero-initialized residual projections for the equivariance check
  for (int i = 0; i < cfg.n_blocks; ++i) {
    p.set(net.blocks[static_cast<size_t>(i)].attn_out.w, Tensor::randn({16, 16, 5}, rng, 0.25));
    p.set(net.blocks[static_cast<size_t>(i)].attn_out.v, Tensor::randn({16, 16, 4}, rng, 0.25));
    p.set(net.blocks[static_cast<size_t>(i)].mlp_out.w, Tensor::randn({16, 16, 5}, rng, 0.25));
    p.set(net.blocks[static_cast<size_t>(i)].mlp_out.v, Tensor::randn({16, 16, 4}, rng, 0.25));
  }

  Tensor xv = Tensor::randn({1, 2, 5, 16}, rng);
  Tape t;
  int x = t.leaf(xv);
  int y = apply_pgatr_net(t, p, net, x);
  CHECK(t.value(y).shape() == std::vector<int>{1, 2, 5, 16});

  // deterministic: a fresh tape over the same params and input matches bitwise
  Tape t2;
  int x2 = t2.leaf(xv);
  int y2 = apply_pgatr_net(t2, p, net, x2);
  for (int64_t i = 0; i < t.value(y).numel(); ++i) CHECK(t.value(y)[i] == t2.value(y2)[i]);

  check_equivariance(t, x, y, 100, rng);

  // wrong shape rejected
  Tape t3;
  int bad = t3.leaf(Tensor::randn({1, 3, 5, 16}, rng));
  CHECK_THROWS_AS(apply_pgatr_net(t3, p, net, bad), std::invalid_argument);
}

TEST_CASE("pgatr layers pass gradcheck") {
  register_builtin_gradchecks();
  register_pgatr_gradchecks();
  for (const char* name : {"geometric_bilinear", "pgatr_block", "pgatr_net_tiny"}) {
    GradCheckReport r = gradcheck(name, 3);
    INFO("layer ", name, " max_rel_err ", r.max_rel_err);
    CHECK(r.pass);
  }
}
