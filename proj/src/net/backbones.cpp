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

#include "hpga/net/backbones.hpp"

#include "hpga/ad/ops.hpp"

namespace hpga::net {

using namespace hpga::ad;

Denoiser make_denoiser(ModelParams& p, int group, const std::string& name, bool is_unet,
                       int t_len, int f_in, int cond_tokens, int cond_feat, Rng& rng) {
  Denoiser d;
  d.is_unet = is_unet;
  d.t_len = t_len;
  d.f_in = f_in;
  d.cond_tokens = cond_tokens;
  d.cond_feat = cond_feat;
  if (is_unet) {
    UnetConfig cfg;
    cfg.t_len = t_len;
    cfg.f_in = f_in;
    cfg.cond_dim = cond_tokens * cond_feat;
    cfg.temb_dim = d.temb_dim;
    d.unet = make_unet(p, group, name, cfg, rng);
  } else {
    TransformerConfig cfg;
    cfg.t_tokens = t_len;
    cfg.f_in = f_in;
    cfg.cond_tokens = cond_tokens;
    cfg.cond_feat = cond_feat;
    cfg.temb_dim = d.temb_dim;
    d.transformer = make_transformer(p, group, name, cfg, rng);
  }
  return d;
}

int apply_denoiser(Tape& t, const ModelParams& p, const Denoiser& d, int x, int cond,
                   int temb) {
  if (d.is_unet) {
    int flat = reshape(t, cond, {t.value(cond).dim(0), d.cond_tokens * d.cond_feat});
    return apply_unet(t, p, d.unet, x, flat, temb);
  }
  return apply_transformer(t, p, d.transformer, x, cond, temb);
}

}  // namespace hpga::net
