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

#include "hpga/net/unet.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "hpga/ad/gradcheck.hpp"
#include "hpga/ad/ops.hpp"

namespace hpga::net {

using namespace hpga::ad;

namespace {

DenseParams make_dense(ModelParams& p, int group, const std::string& name, int fi, int fo,
                       Rng& rng, bool zero_init = false) {
  double stddev = zero_init ? 0.0 : 1.0 / std::sqrt(static_cast<double>(fi));
  DenseParams d;
  d.w = p.add_param(group, name + ".w", Tensor::randn({fo, fi}, rng, stddev));
  d.b = p.add_param(group, name + ".b", Tensor::zeros({fo}));
  return d;
}

Conv1dParams make_conv(ModelParams& p, int group, const std::string& name, int ci, int co,
                       int kernel, int stride, int pad, Rng& rng, bool zero_init = false) {
  double stddev = zero_init ? 0.0 : 1.0 / std::sqrt(static_cast<double>(ci * kernel));
  Conv1dParams c;
  c.w = p.add_param(group, name + ".w", Tensor::randn({co, ci, kernel}, rng, stddev));
  c.b = p.add_param(group, name + ".b", Tensor::zeros({co}));
  c.stride = stride;
  c.pad = pad;
  return c;
}

int apply_dense(Tape& t, const ModelParams& p, const DenseParams& d, int x) {
  return linear(t, x, t.param(p, d.w), t.param(p, d.b));
}

int apply_conv(Tape& t, const ModelParams& p, const Conv1dParams& c, int x) {
  return conv1d(t, x, t.param(p, c.w), t.param(p, c.b), c.stride, c.pad);
}

FilmResBlock make_res_block(ModelParams& p, int group, const std::string& name, int ci, int co,
                            int cond_emb, Rng& rng) {
  FilmResBlock r;
  r.out_channels = co;
  r.conv1 = make_conv(p, group, name + ".conv1", ci, co, 3, 1, 1, rng);
  r.conv2 = make_conv(p, group, name + ".conv2", co, co, 3, 1, 1, rng);
  r.film = make_dense(p, group, name + ".film", cond_emb, 2 * co, rng);
  r.ln1_g = p.add_param(group, name + ".ln1.g", Tensor::full({co}, 1.0));
  r.ln1_b = p.add_param(group, name + ".ln1.b", Tensor::zeros({co}));
  r.ln2_g = p.add_param(group, name + ".ln2.g", Tensor::full({co}, 1.0));
  r.ln2_b = p.add_param(group, name + ".ln2.b", Tensor::zeros({co}));
  if (ci != co) {
    r.skip = make_conv(p, group, name + ".skip", ci, co, 1, 1, 0, rng);
    r.has_skip = true;
  }
  return r;
}

int apply_res_block(Tape& t, const ModelParams& p, const FilmResBlock& r, int x, int cemb) {
  int film = apply_dense(t, p, r.film, cemb);  // (B, 2co)
  int co = r.out_channels;
  int s = slice(t, film, 1, 0, co);
  int b = slice(t, film, 1, co, co);
  int h = apply_conv(t, p, r.conv1, x);
  h = layer_norm(t, h, t.param(p, r.ln1_g), t.param(p, r.ln1_b));
  h = scale_shift(t, h, s, b);
  h = gelu(t, h);
  h = apply_conv(t, p, r.conv2, h);
  h = layer_norm(t, h, t.param(p, r.ln2_g), t.param(p, r.ln2_b));
  h = gelu(t, h);
  int res = r.has_skip ? apply_conv(t, p, r.skip, x) : x;
  return add(t, h, res);
}

}  // namespace

Tensor timestep_embedding(int k, int dim) {
  Tensor e({dim});
  int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    double freq = std::exp(-std::log(10000.0) * i / std::max(1, half - 1));
    e[i] = std::sin(k * freq);
    e[half + i] = std::cos(k * freq);
  }
  return e;
}

int64_t param_count(const ModelParams& p, int group) { return p.group_size(group); }

UnetParams make_unet(ModelParams& p, int group, const std::string& name, const UnetConfig& cfg,
                     Rng& rng) {
  if (cfg.t_len % 4 != 0) {
    throw std::invalid_argument("unet: t_len must be divisible by the downsampling factor 4");
  }
  UnetParams u;
  u.cfg = cfg;
  u.cond1 = make_dense(p, group, name + ".cond1", cfg.temb_dim + cfg.cond_dim, cfg.cond_emb, rng);
  u.cond2 = make_dense(p, group, name + ".cond2", cfg.cond_emb, cfg.cond_emb, rng);
  u.stem = make_conv(p, group, name + ".stem", cfg.f_in, cfg.w0, 3, 1, 1, rng);
  u.res_down0 = make_res_block(p, group, name + ".res_down0", cfg.w0, cfg.w0, cfg.cond_emb, rng);
  u.down0 = make_conv(p, group, name + ".down0", cfg.w0, cfg.w1, 3, 2, 1, rng);
  u.res_down1 = make_res_block(p, group, name + ".res_down1", cfg.w1, cfg.w1, cfg.cond_emb, rng);
  u.down1 = make_conv(p, group, name + ".down1", cfg.w1, cfg.w2, 3, 2, 1, rng);
  u.res_mid = make_res_block(p, group, name + ".res_mid", cfg.w2, cfg.w2, cfg.cond_emb, rng);
  u.up1 = make_conv(p, group, name + ".up1", cfg.w2, cfg.w1, 3, 1, 1, rng);
  u.res_up1 = make_res_block(p, group, name + ".res_up1", 2 * cfg.w1, cfg.w1, cfg.cond_emb, rng);
  u.up0 = make_conv(p, group, name + ".up0", cfg.w1, cfg.w0, 3, 1, 1, rng);
  u.res_up0 = make_res_block(p, group, name + ".res_up0", 2 * cfg.w0, cfg.w0, cfg.cond_emb, rng);
  u.head = make_conv(p, group, name + ".head", cfg.w0, cfg.f_in, 1, 1, 0, rng,
                     /*zero_init=*/true);
  return u;
}

int apply_unet(Tape& t, const ModelParams& p, const UnetParams& u, int x, int cond, int temb) {
  const auto& sx = t.value(x).shape();
  if (sx.size() != 3 || sx[1] != u.cfg.t_len || sx[2] != u.cfg.f_in) {
    throw std::invalid_argument("unet: input must be (B," + std::to_string(u.cfg.t_len) + "," +
                                std::to_string(u.cfg.f_in) + ")");
  }
  int cemb = concat(t, temb, cond, 1);
  cemb = gelu(t, apply_dense(t, p, u.cond1, cemb));
  cemb = apply_dense(t, p, u.cond2, cemb);

  int h0 = apply_conv(t, p, u.stem, x);              // (B,T,w0)
  h0 = apply_res_block(t, p, u.res_down0, h0, cemb);
  int h1 = apply_conv(t, p, u.down0, h0);            // (B,T/2,w1)
  h1 = apply_res_block(t, p, u.res_down1, h1, cemb);
  int h2 = apply_conv(t, p, u.down1, h1);            // (B,T/4,w2)
  h2 = apply_res_block(t, p, u.res_mid, h2, cemb);

  int up = apply_conv(t, p, u.up1, upsample2(t, h2));  // (B,T/2,w1)
  up = apply_res_block(t, p, u.res_up1, concat(t, up, h1, 2), cemb);
  up = apply_conv(t, p, u.up0, upsample2(t, up));      // (B,T,w0)
  up = apply_res_block(t, p, u.res_up0, concat(t, up, h0, 2), cemb);
  return apply_conv(t, p, u.head, up);
}

void register_unet_gradcheck() {
  register_gradcheck("unet_tiny", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    ModelParams params;
    int g = params.add_group("denoiser");
    UnetConfig cfg;
    cfg.t_len = 4;
    cfg.f_in = 3;
    cfg.cond_dim = 5;
    cfg.temb_dim = 4;
    cfg.w0 = 4;
    cfg.w1 = 6;
    cfg.w2 = 8;
    cfg.cond_emb = 6;
    UnetParams u = make_unet(params, g, "unet", cfg, rng);
    // head is zero-initialized; give it signal so gradients reach every leaf
    params.set(u.head.w, Tensor::randn({cfg.f_in, cfg.w0, 1}, rng, 0.4));
    int x = cs.tape->leaf(Tensor::randn({2, 4, 3}, rng));
    int cond = cs.tape->leaf(Tensor::randn({2, 5}, rng));
    int temb = cs.tape->leaf(Tensor::randn({2, 4}, rng));
    cs.output = apply_unet(*cs.tape, params, u, x, cond, temb);
    cs.inputs = {x, cond, temb};
    for (int id : cs.tape->param_leaf_ids()) cs.inputs.push_back(id);
    return cs;
  });
}

}  // namespace hpga::net
