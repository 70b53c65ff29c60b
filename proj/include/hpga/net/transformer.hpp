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

#ifndef HPGA_NET_TRANSFORMER_HPP_
#define HPGA_NET_TRANSFORMER_HPP_

#include <string>
#include <vector>

#include "hpga/net/unet.hpp"

// Pre-norm transformer for noise prediction: conditioning tokens (one per
// observation step) are prepended to the action tokens, the timestep
// embedding is added to every token, and learned positional embeddings keep
// token order meaningful. The head is zero-initialized.

namespace hpga::net {

struct TransformerConfig {
  int t_tokens = 16;   // action tokens
  int f_in = 48;       // features per action token
  int cond_tokens = 2; // observation steps
  int cond_feat = 80;  // features per conditioning token
  int temb_dim = 64;
  int dim = 128;
  int n_layers = 4;
  int n_heads = 4;
  int mlp_mult = 4;
};

struct TransformerLayer {
  ad::ParamRef ln1_g, ln1_b, ln2_g, ln2_b;
  DenseParams q, k, v, out;
  DenseParams mlp1, mlp2;
};

struct TransformerParams {
  TransformerConfig cfg;
  DenseParams embed_action, embed_cond, embed_time;
  ad::ParamRef pos;  // (cond_tokens + t_tokens, dim)
  std::vector<TransformerLayer> layers;
  ad::ParamRef lnf_g, lnf_b;
  DenseParams head;  // zero-initialized
};

TransformerParams make_transformer(ad::ModelParams& p, int group, const std::string& name,
                                   const TransformerConfig& cfg, Rng& rng);

// x (B, t_tokens, f_in), cond (B, cond_tokens, cond_feat), temb (B, temb_dim)
// -> (B, t_tokens, f_in)
int apply_transformer(ad::Tape& t, const ad::ModelParams& p, const TransformerParams& tr, int x,
                      int cond, int temb);

void register_transformer_gradcheck();

}  // namespace hpga::net

#endif  // HPGA_NET_TRANSFORMER_HPP_
