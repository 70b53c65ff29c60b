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
#include "hpga/ad/ops.hpp"
#include "hpga/diffusion/diffusion.hpp"
#include "hpga/net/backbones.hpp"

using namespace hpga;
using namespace hpga::ad;
using namespace hpga::net;

TEST_CASE("unet: shape contract and zero-initialized head") {
  Rng rng(81);
  ModelParams p;
  int g = p.add_group("denoiser");
  UnetConfig cfg;
  cfg.t_len = 8;
  cfg.f_in = 10;
  cfg.cond_dim = 12;
  cfg.w0 = 8;
  cfg.w1 = 12;
  cfg.w2 = 16;
  cfg.cond_emb = 8;
  UnetParams u = make_unet(p, g, "unet", cfg, rng);

  Tape t;
  int x = t.leaf(Tensor::randn({2, 8, 10}, rng));
  int cond = t.leaf(Tensor::randn({2, 12}, rng));
  int temb = t.leaf(Tensor::randn({2, cfg.temb_dim}, rng));
  int out = apply_unet(t, p, u, x, cond, temb);
  CHECK(t.value(out).shape() == std::vector<int>{2, 8, 10});
  for (int64_t i = 0; i < t.value(out).numel(); ++i) CHECK(t.value(out)[i] == 0.0);

  UnetConfig bad = cfg;
  bad.t_len = 6;  // not divisible by the downsampling factor
  CHECK_THROWS_AS(make_unet(p, g, "unet_bad", bad, rng), std::invalid_argument);
}

TEST_CASE("transformer: shape contract, zero head, conditioning sensitivity") {
  Rng rng(82);
  ModelParams p;
  int g = p.add_group("denoiser");
  TransformerConfig cfg;
  cfg.t_tokens = 4;
  cfg.f_in = 6;
  cfg.cond_tokens = 3;
  cfg.cond_feat = 5;
  cfg.dim = 16;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  TransformerParams tr = make_transformer(p, g, "tr", cfg, rng);

  Tape t;
  int x = t.leaf(Tensor::randn({1, 4, 6}, rng));
  int cond = t.leaf(Tensor::randn({1, 3, 5}, rng));
  int temb = t.leaf(Tensor::randn({1, cfg.temb_dim}, rng));
  int out = apply_transformer(t, p, tr, x, cond, temb);
  CHECK(t.value(out).shape() == std::vector<int>{1, 4, 6});
  for (int64_t i = 0; i < t.value(out).numel(); ++i) CHECK(t.value(out)[i] == 0.0);

  // wake the residual branches and the head, then probe conditioning order
  for (TransformerLayer& l : tr.layers) {
    p.set(l.out.w, Tensor::randn({cfg.dim, cfg.dim}, rng, 0.3));
    p.set(l.mlp2.w, Tensor::randn({cfg.dim, cfg.mlp_mult * cfg.dim}, rng, 0.3));
  }
  p.set(tr.head.w, Tensor::randn({cfg.f_in, cfg.dim}, rng, 0.3));
  t.refresh_params(p);
  t.replay();
  Tensor base = t.value(out);

  // permuting conditioning tokens (actions fixed) must change the output
  Tensor permuted = t.value(cond);
  for (int f = 0; f < cfg.cond_feat; ++f) {
    std::swap(permuted.at(0, 0, f), permuted.at(0, 2, f));
  }
  t.set_leaf(cond, permuted);
  t.replay();
  double diff = 0.0;
  for (int64_t i = 0; i < base.numel(); ++i) diff += std::abs(t.value(out)[i] - base[i]);
  CHECK(diff > 1e-6);
}

TEST_CASE("denoiser wrapper dispatches and keeps eps-hat shape") {
  Rng rng(83);
  for (bool is_unet : {true, false}) {
    ModelParams p;
    int g = p.add_group("denoiser");
    Denoiser d = make_denoiser(p, g, "den", is_unet, 8, 10, 2, 7, rng);
    Tape t;
    int x = t.leaf(Tensor::randn({2, 8, 10}, rng));
    int cond = t.leaf(Tensor::randn({2, 2, 7}, rng));
    int temb = t.leaf(Tensor::randn({2, d.temb_dim}, rng));
    int out = apply_denoiser(t, p, d, x, cond, temb);
    CHECK(t.value(out).shape() == std::vector<int>{2, 8, 10});
  }
}

TEST_CASE("timestep embedding: deterministic and injective over the schedule") {
  Tensor a = timestep_embedding(7, 64);
  Tensor b = timestep_embedding(7, 64);
  for (int i = 0; i < 64; ++i) CHECK(a[i] == b[i]);
  for (int k1 = 0; k1 <= 100; ++k1) {
    for (int k2 = k1 + 1; k2 <= 100; ++k2) {
      Tensor e1 = timestep_embedding(k1, 64);
      Tensor e2 = timestep_embedding(k2, 64);
      double d = 0.0;
      for (int i = 0; i < 64; ++i) d += std::abs(e1[i] - e2[i]);
      CHECK(d > 1e-9);
    }
  }
}

TEST_CASE("baseline denoiser parameter count within 10% of the geometric variant") {
  // full-size configurations, as used by the acceptance runs
  Rng rng(84);
  for (bool is_unet : {true, false}) {
    ModelParams hp;
    int hg = hp.add_group("denoiser");
    make_denoiser(hp, hg, "den", is_unet, 16, 48, 2, 80, rng);  // latent features
    ModelParams bp;
    int bg = bp.add_group("denoiser");
    make_denoiser(bp, bg, "den", is_unet, 16, 8, 2, 15, rng);   // raw features
    double h = static_cast<double>(param_count(hp, hg));
    double b = static_cast<double>(param_count(bp, bg));
    CHECK(std::abs(h - b) / h <= 0.10);
  }
}

TEST_CASE("backbone gradchecks at 1e-4") {
  register_builtin_gradchecks();
  register_unet_gradcheck();
  register_transformer_gradcheck();
  for (const char* name : {"unet_tiny", "transformer_tiny"}) {
    GradCheckReport r = gradcheck(name, 2, 1e-4, 20260101, 120);
    INFO("backbone ", name, " max_rel_err ", r.max_rel_err);
    CHECK(r.pass);
  }
}

TEST_CASE("end-to-end training-objective gradcheck on a tiny config") {
  // H_p = 4, K_a = 2 analogue: finite-difference the full staged objective
  // w.r.t. a slice of each parameter group at 1e-3
  using namespace hpga::diffusion;
  Rng rng(85);
  ModelConfig mc;
  mc.h_o = 2;
  mc.h_p = 4;
  mc.k_o = 3;
  mc.k_a = 2;
  mc.k_max = 10;
  mc.eta = 0.5;
  mc.pgatr.n_blocks = 2;
  mc.pgatr.channels = 4;
  mc.pgatr.n_heads = 2;

  for (net::Variant variant : {net::Variant::kHpgaU, net::Variant::kHpgaT}) {
    mc.variant = variant;
    PolicyModel m(mc, 21);
    Tensor obs = Tensor::randn({2, mc.h_o, mc.k_o, 16}, rng);
    Tensor act = Tensor::randn({2, mc.h_p, mc.k_a, 16}, rng);
    std::vector<int> ks = {mc.k_max - 1, mc.k_max};  // both losses active

    // fixed noise: reuse the same rng seed for every evaluation
    auto loss_at = [&]() {
      Rng r(99);
      PolicyModel::StepResult res = m.train_step_with_ks(obs, act, ks, r);
      return res.l_total;
    };
    loss_at();  // populate gradients

    for (int group : {m.group_encoder(), m.group_denoiser(), m.group_decoder()}) {
      auto& gr = m.params().group(group);
      REQUIRE(!gr.values.empty());
      Rng pick(static_cast<uint64_t>(group) + 31);
      double max_err = 0.0;
      for (int probe = 0; probe < 8; ++probe) {
        size_t idx = static_cast<size_t>(pick.next() % gr.values.size());
        double saved = gr.values[idx];
        double analytic = gr.grads[idx];
        double h = 1e-6;
        gr.values[idx] = saved + h;
        double fp = loss_at();
        gr.values[idx] = saved - h;
        double fm = loss_at();
        gr.values[idx] = saved;
        loss_at();
        double fd = (fp - fm) / (2 * h);
        double err = std::abs(analytic - fd) / std::max({1e-3, std::abs(analytic), std::abs(fd)});
        max_err = std::max(max_err, err);
      }
      INFO("variant ", net::variant_to_string(variant), " group ", group, " err ", max_err);
      CHECK(max_err <= 1e-3);
    }
  }
}
