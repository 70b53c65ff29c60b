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

#ifndef HPGA_NET_PGATR_HPP_
#define HPGA_NET_PGATR_HPP_

#include <string>
#include <vector>

#include "hpga/ad/ops.hpp"
#include "hpga/ad/params.hpp"
#include "hpga/ad/rng.hpp"
#include "hpga/ad/tape.hpp"

// Equivariant transformer over multivector stacks: grade-wise linear maps
// with e0 junctions, geometric/join bilinears gated by a reference
// pseudoscalar, invariant-inner-product attention, scalar-gated GELU, and
// invariant-norm layer normalization, assembled into pre-norm residual
// blocks. Tokens are the flattened (time x entity-channel) axis; the network
// lifts each token to `channels` internal multivector channels and projects
// back at the end, so input and output dimensions match.

namespace hpga::net {

struct PgatrConfig {
  int n_blocks = 4;
  int channels = 16;
  int n_heads = 4;
};

struct EquiLinear {
  ad::ParamRef w;  // (Co, Ci, 5)
  ad::ParamRef v;  // (Co, Ci, 4)
  int in_channels = 0;
  int out_channels = 0;
};

EquiLinear make_equi_linear(ad::ModelParams& p, int group, const std::string& name, int ci,
                            int co, Rng& rng, bool zero_init = false);
int apply_equi_linear(ad::Tape& t, const ad::ModelParams& p, const EquiLinear& l, int x);

// Concat of channel-wise geometric products and reference-gated joins,
// projected back to the input channel count.
struct GeometricBilinear {
  EquiLinear proj;  // 2C -> C
};

GeometricBilinear make_geometric_bilinear(ad::ModelParams& p, int group,
                                          const std::string& name, int channels, Rng& rng);
// x, y, ref share shape (B,T,C,16); the join half of channel c is scaled by
// the e0123 coefficient of ref channel c.
int apply_geometric_bilinear(ad::Tape& t, const ad::ModelParams& p, const GeometricBilinear& l,
                             int x, int y, int ref);

struct PgatrBlock {
  EquiLinear attn_q, attn_k, attn_v, attn_out;
  EquiLinear bil_left, bil_right;
  GeometricBilinear bilinear;
  EquiLinear mlp_out;
  int n_heads = 0;
};

PgatrBlock make_pgatr_block(ad::ModelParams& p, int group, const std::string& name,
                            const PgatrConfig& cfg, Rng& rng);
int apply_pgatr_block(ad::Tape& t, const ad::ModelParams& p, const PgatrBlock& b, int x);

// Full stack operating on (B, T, K, 16) multivector stacks with T*K tokens.
struct PgatrNet {
  PgatrConfig cfg;
  int time_steps = 0;
  int k_channels = 0;
  EquiLinear lift;       // 1 -> C
  ad::ParamRef pos;      // (T*K) scalar markers
  std::vector<PgatrBlock> blocks;
  EquiLinear proj;       // C -> 1
};

PgatrNet make_pgatr_net(ad::ModelParams& p, int group, const std::string& name,
                        const PgatrConfig& cfg, int time_steps, int k_channels, Rng& rng);
int apply_pgatr_net(ad::Tape& t, const ad::ModelParams& p, const PgatrNet& net, int x);

// Registers gradcheck cases for the full layers (block, bilinear, tiny net).
void register_pgatr_gradchecks();

}  // namespace hpga::net

#endif  // HPGA_NET_PGATR_HPP_
