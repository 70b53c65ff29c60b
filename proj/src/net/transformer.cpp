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

#include "hpga/net/transformer.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "hpga/ad/gradcheck.hpp"
#include "hpga/ad/ops.hpp"

namespace hpga::net {

using namespace hpga::ad;

namespace {

DenseParams dense(ModelParams& p, int group, const std::string& name, int fi, int fo, Rng& rng,
                  bool zero_init = false) {
  double stddev = zero_init ? 0.0 : 1.0 / std::sqrt(static_cast<double>(fi));
  DenseParams d;
  d.w = p.add_param(group, name + ".w", Tensor::randn({fo, fi}, rng, stddev));
  d.b = p.add_param(group, name + ".b", Tensor::zeros({fo}));
  return d;
}

int apply_dense(Tape& t, const ModelParams& p, const DenseParams& d, int x) {
  return linear(t, x, t.param(p, d.w), t.param(p, d.b));
}

}  // namespace

TransformerParams make_transformer(ModelParams& p, int group, const std::string& name,
                                   const TransformerConfig& cfg, Rng& rng) {
  if (cfg.dim % cfg.n_heads != 0) {
    throw std::invalid_argument("transformer: dim must be divisible by n_heads");
  }
  TransformerParams tr;
  tr.cfg = cfg;
  tr.embed_action = dense(p, group, name + ".embed_action", cfg.f_in, cfg.dim, rng);
  tr.embed_cond = dense(p, group, name + ".embed_cond", cfg.cond_feat, cfg.dim, rng);
  tr.embed_time = dense(p, group, name + ".embed_time", cfg.temb_dim, cfg.dim, rng);
  tr.pos = p.add_param(group, name + ".pos",
                       Tensor::randn({cfg.cond_tokens + cfg.t_tokens, cfg.dim}, rng, 0.02));
  for (int i = 0; i < cfg.n_layers; ++i) {
    TransformerLayer l;
    std::string base = name + ".layer" + std::to_string(i);
    l.ln1_g = p.add_param(group, base + ".ln1.g", Tensor::full({cfg.dim}, 1.0));
    l.ln1_b = p.add_param(group, base + ".ln1.b", Tensor::zeros({cfg.dim}));
    l.ln2_g = p.add_param(group, base + ".ln2.g", Tensor::full({cfg.dim}, 1.0));
    l.ln2_b = p.add_param(group, base + ".ln2.b", Tensor::zeros({cfg.dim}));
    l.q = dense(p, group, base + ".q", cfg.dim, cfg.dim, rng);
    l.k = dense(p, group, base + ".k", cfg.dim, cfg.dim, rng);
    l.v = dense(p, group, base + ".v", cfg.dim, cfg.dim, rng);
    l.out = dense(p, group, base + ".out", cfg.dim, cfg.dim, rng, /*zero_init=*/true);
    l.mlp1 = dense(p, group, base + ".mlp1", cfg.dim, cfg.mlp_mult * cfg.dim, rng);
    l.mlp2 = dense(p, group, base + ".mlp2", cfg.mlp_mult * cfg.dim, cfg.dim, rng,
                   /*zero_init=*/true);
    tr.layers.push_back(l);
  }
  tr.lnf_g = p.add_param(group, name + ".lnf.g", Tensor::full({cfg.dim}, 1.0));
  tr.lnf_b = p.add_param(group, name + ".lnf.b", Tensor::zeros({cfg.dim}));
  tr.head = dense(p, group, name + ".head", cfg.dim, cfg.f_in, rng, /*zero_init=*/true);
  return tr;
}

int apply_transformer(Tape& t, const ModelParams& p, const TransformerParams& tr, int x,
                      int cond, int temb) {
  const auto& cfg = tr.cfg;
  const auto& sx = t.value(x).shape();
  if (sx.size() != 3 || sx[1] != cfg.t_tokens || sx[2] != cfg.f_in) {
    throw std::invalid_argument("transformer: action tokens must be (B," +
                                std::to_string(cfg.t_tokens) + "," + std::to_string(cfg.f_in) +
                                ")");
  }
  const auto& sc = t.value(cond).shape();
  if (sc.size() != 3 || sc[1] != cfg.cond_tokens || sc[2] != cfg.cond_feat) {
    throw std::invalid_argument("transformer: conditioning tokens must be (B," +
                                std::to_string(cfg.cond_tokens) + "," +
                                std::to_string(cfg.cond_feat) + ")");
  }

  int h_act = apply_dense(t, p, tr.embed_action, x);     // (B,Tp,dim)
  int h_cond = apply_dense(t, p, tr.embed_cond, cond);   // (B,Tc,dim)
  int h = concat(t, h_cond, h_act, 1);                   // (B,Tc+Tp,dim)
  int te = apply_dense(t, p, tr.embed_time, temb);       // (B,dim)
  h = add_bcast_tokens(t, h, te);
  h = add_bcast_rows(t, h, t.param(p, tr.pos));

  for (const TransformerLayer& l : tr.layers) {
    int n = layer_norm(t, h, t.param(p, l.ln1_g), t.param(p, l.ln1_b));
    int att = sdpa(t, apply_dense(t, p, l.q, n), apply_dense(t, p, l.k, n),
                   apply_dense(t, p, l.v, n), cfg.n_heads);
    h = add(t, h, apply_dense(t, p, l.out, att));
    int n2 = layer_norm(t, h, t.param(p, l.ln2_g), t.param(p, l.ln2_b));
    int m = apply_dense(t, p, l.mlp2, gelu(t, apply_dense(t, p, l.mlp1, n2)));
    h = add(t, h, m);
  }

  int act = slice(t, h, 1, cfg.cond_tokens, cfg.t_tokens);
  act = layer_norm(t, act, t.param(p, tr.lnf_g), t.param(p, tr.lnf_b));
  return apply_dense(t, p, tr.head, act);
}

void register_transformer_gradcheck() {
  register_gradcheck("transformer_tiny", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    ModelParams params;
    int g = params.add_group("denoiser");
    TransformerConfig cfg;
    cfg.t_tokens = 3;
    cfg.f_in = 4;
    cfg.cond_tokens = 2;
    cfg.cond_feat = 5;
    cfg.temb_dim = 4;
    cfg.dim = 8;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.mlp_mult = 2;
    TransformerParams tr = make_transformer(params, g, "tr", cfg, rng);
    params.set(tr.head.w, Tensor::randn({cfg.f_in, cfg.dim}, rng, 0.4));
    int x = cs.tape->leaf(Tensor::randn({2, 3, 4}, rng));
    int cond = cs.tape->leaf(Tensor::randn({2, 2, 5}, rng));
    int temb = cs.tape->leaf(Tensor::randn({2, 4}, rng));
    cs.output = apply_transformer(*cs.tape, params, tr, x, cond, temb);
    cs.inputs = {x, cond, temb};
    for (int id : cs.tape->param_leaf_ids()) cs.inputs.push_back(id);
    return cs;
  });
}

}  // namespace hpga::net
