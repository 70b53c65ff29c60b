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

#include "hpga/net/pgatr.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "hpga/ad/gradcheck.hpp"
#include "hpga/pga/blades.hpp"

namespace hpga::net {

using namespace hpga::ad;

EquiLinear make_equi_linear(ModelParams& p, int group, const std::string& name, int ci, int co,
                            Rng& rng, bool zero_init) {
  EquiLinear l;
  l.in_channels = ci;
  l.out_channels = co;
  double stddev = zero_init ? 0.0 : 1.0 / std::sqrt(static_cast<double>(ci));
  l.w = p.add_param(group, name + ".w", Tensor::randn({co, ci, 5}, rng, stddev));
  l.v = p.add_param(group, name + ".v", Tensor::randn({co, ci, 4}, rng, stddev));
  return l;
}

int apply_equi_linear(Tape& t, const ModelParams& p, const EquiLinear& l, int x) {
  return equi_linear(t, x, t.param(p, l.w), t.param(p, l.v));
}

GeometricBilinear make_geometric_bilinear(ModelParams& p, int group, const std::string& name,
                                          int channels, Rng& rng) {
  GeometricBilinear l;
  l.proj = make_equi_linear(p, group, name + ".proj", 2 * channels, channels, rng);
  return l;
}

int apply_geometric_bilinear(Tape& t, const ModelParams& p, const GeometricBilinear& l, int x,
                             int y, int ref) {
  int products = pga_geometric(t, x, y);
  int joins = pga_join(t, x, y);
  // join half gated by the reference pseudoscalar, channel by channel
  int gate = slice(t, ref, 3, pga::kE0123, 1);  // (B,T,C,1)
  int gated = mul_bcast_lastdim(t, joins, gate);
  int cat = concat(t, products, gated, 2);
  return apply_equi_linear(t, p, l.proj, cat);
}

PgatrBlock make_pgatr_block(ModelParams& p, int group, const std::string& name,
                            const PgatrConfig& cfg, Rng& rng) {
  if (cfg.channels % cfg.n_heads != 0) {
    throw std::invalid_argument("pgatr: channels must be divisible by n_heads");
  }
  PgatrBlock b;
  int c = cfg.channels;
  b.attn_q = make_equi_linear(p, group, name + ".attn.q", c, c, rng);
  b.attn_k = make_equi_linear(p, group, name + ".attn.k", c, c, rng);
  b.attn_v = make_equi_linear(p, group, name + ".attn.v", c, c, rng);
  b.attn_out = make_equi_linear(p, group, name + ".attn.out", c, c, rng, /*zero_init=*/true);
  b.bil_left = make_equi_linear(p, group, name + ".bil.left", c, c, rng);
  b.bil_right = make_equi_linear(p, group, name + ".bil.right", c, c, rng);
  b.bilinear = make_geometric_bilinear(p, group, name + ".bil", c, rng);
  b.mlp_out = make_equi_linear(p, group, name + ".mlp.out", c, c, rng, /*zero_init=*/true);
  b.n_heads = cfg.n_heads;
  return b;
}

int apply_pgatr_block(Tape& t, const ModelParams& p, const PgatrBlock& b, int x) {
  // attention branch
  int h = equi_layernorm(t, x);
  int att = mv_attention(t, apply_equi_linear(t, p, b.attn_q, h),
                         apply_equi_linear(t, p, b.attn_k, h),
                         apply_equi_linear(t, p, b.attn_v, h), b.n_heads);
  x = add(t, x, apply_equi_linear(t, p, b.attn_out, att));

  // bilinear branch; join(h, h) vanishes identically, so distinct learned
  // operands feed the bilinear, and the gate reads the block input's
  // dedicated reference channel (channel 0)
  int h2 = equi_layernorm(t, x);
  int left = apply_equi_linear(t, p, b.bil_left, h2);
  int right = apply_equi_linear(t, p, b.bil_right, h2);
  int ref_channel = slice(t, x, 2, 0, 1);  // (B,T,1,16)
  const auto& sx = t.value(x).shape();
  int c = sx[2];
  int ref = ref_channel;
  if (c > 1) {
    // broadcast the dedicated channel across all C gate slots
    int acc = ref_channel;
    for (int i = 1; i < c; ++i) acc = concat(t, acc, ref_channel, 2);
    ref = acc;
  }
  int bil = apply_geometric_bilinear(t, p, b.bilinear, left, right, ref);
  int act = gated_gelu(t, bil);
  return add(t, x, apply_equi_linear(t, p, b.mlp_out, act));
}

PgatrNet make_pgatr_net(ModelParams& p, int group, const std::string& name,
                        const PgatrConfig& cfg, int time_steps, int k_channels, Rng& rng) {
  if (cfg.n_blocks < 1) throw std::invalid_argument("pgatr: n_blocks must be >= 1");
  PgatrNet net;
  net.cfg = cfg;
  net.time_steps = time_steps;
  net.k_channels = k_channels;
  net.lift = make_equi_linear(p, group, name + ".lift", 1, cfg.channels, rng);
  net.pos = p.add_param(group, name + ".pos",
                        Tensor::randn({time_steps * k_channels}, rng, 0.02));
  for (int i = 0; i < cfg.n_blocks; ++i) {
    net.blocks.push_back(
        make_pgatr_block(p, group, name + ".block" + std::to_string(i), cfg, rng));
  }
  net.proj = make_equi_linear(p, group, name + ".proj", cfg.channels, 1, rng);
  return net;
}

int apply_pgatr_net(Tape& t, const ModelParams& p, const PgatrNet& net, int x) {
  const auto& sx = t.value(x).shape();
  if (sx.size() != 4 || sx[1] != net.time_steps || sx[2] != net.k_channels || sx[3] != 16) {
    throw std::invalid_argument("pgatr net: input must be (B," +
                                std::to_string(net.time_steps) + "," +
                                std::to_string(net.k_channels) + ",16)");
  }
  int b = sx[0];
  int tokens = net.time_steps * net.k_channels;
  int h = reshape(t, x, {b, tokens, 1, 16});
  h = apply_equi_linear(t, p, net.lift, h);
  h = add_scalar_slot(t, h, t.param(p, net.pos));
  for (const PgatrBlock& blk : net.blocks) h = apply_pgatr_block(t, p, blk, h);
  h = apply_equi_linear(t, p, net.proj, h);
  return reshape(t, h, {b, net.time_steps, net.k_channels, 16});
}

void register_pgatr_gradchecks() {
  register_gradcheck("geometric_bilinear", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    ModelParams params;
    int g = params.add_group("net");
    GeometricBilinear l = make_geometric_bilinear(params, g, "bil", 3, rng);
    int x = cs.tape->leaf(Tensor::randn({1, 2, 3, 16}, rng));
    int y = cs.tape->leaf(Tensor::randn({1, 2, 3, 16}, rng));
    int ref = cs.tape->leaf(Tensor::randn({1, 2, 3, 16}, rng));
    cs.output = apply_geometric_bilinear(*cs.tape, params, l, x, y, ref);
    cs.inputs = {x, y, ref};
    for (int id : cs.tape->param_leaf_ids()) cs.inputs.push_back(id);
    return cs;
  });
  register_gradcheck("pgatr_block", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    ModelParams params;
    int g = params.add_group("net");
    PgatrConfig cfg;
    cfg.n_blocks = 1;
    cfg.channels = 4;
    cfg.n_heads = 2;
    PgatrBlock b = make_pgatr_block(params, g, "blk", cfg, rng);
    int x = cs.tape->leaf(Tensor::randn({1, 3, 4, 16}, rng));
    cs.output = apply_pgatr_block(*cs.tape, params, b, x);
    cs.inputs = {x};
    for (int id : cs.tape->param_leaf_ids()) cs.inputs.push_back(id);
    return cs;
  });
  register_gradcheck("pgatr_net_tiny", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    ModelParams params;
    int g = params.add_group("net");
    PgatrConfig cfg;
    cfg.n_blocks = 2;
    cfg.channels = 4;
    cfg.n_heads = 2;
    PgatrNet net = make_pgatr_net(params, g, "net", cfg, 2, 2, rng);
    int x = cs.tape->leaf(Tensor::randn({1, 2, 2, 16}, rng));
    cs.output = apply_pgatr_net(*cs.tape, params, net, x);
    cs.inputs = {x};
    for (int id : cs.tape->param_leaf_ids()) cs.inputs.push_back(id);
    return cs;
  });
}

}  // namespace hpga::net
