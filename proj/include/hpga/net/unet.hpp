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

#ifndef HPGA_NET_UNET_HPP_
#define HPGA_NET_UNET_HPP_

#include <string>
#include <vector>

#include "hpga/ad/params.hpp"
#include "hpga/ad/rng.hpp"
#include "hpga/ad/tape.hpp"

// Temporal 1-D U-Net for noise prediction. Two stride-2 levels, feature-wise
// modulation from the conditioning embedding at every residual block, skip
// concatenation on the way up, zero-initialized output head.

namespace hpga::net {

struct UnetConfig {
  int t_len = 16;     // must be divisible by 4 (two downsamplings)
  int f_in = 48;      // features per time step
  int cond_dim = 160; // flattened conditioning vector length
  int temb_dim = 64;  // sinusoidal timestep embedding length
  int w0 = 64, w1 = 128, w2 = 256;
  int cond_emb = 128;
};

struct DenseParams {
  ad::ParamRef w, b;
};

struct Conv1dParams {
  ad::ParamRef w, b;
  int stride = 1, pad = 1;
};

struct FilmResBlock {
  Conv1dParams conv1, conv2;
  DenseParams film;            // cond_emb -> 2*out channels
  ad::ParamRef ln1_g, ln1_b, ln2_g, ln2_b;
  Conv1dParams skip;           // 1x1 when channel counts differ
  bool has_skip = false;
  int out_channels = 0;
};

struct UnetParams {
  UnetConfig cfg;
  DenseParams cond1, cond2;    // conditioning MLP
  Conv1dParams stem;
  FilmResBlock res_down0, res_down1, res_mid, res_up1, res_up0;
  Conv1dParams down0, down1;   // stride-2
  Conv1dParams up1, up0;       // post-upsample 3-tap
  Conv1dParams head;           // zero-initialized
};

UnetParams make_unet(ad::ModelParams& p, int group, const std::string& name,
                     const UnetConfig& cfg, Rng& rng);

// x (B, t_len, f_in), cond (B, cond_dim), temb (B, temb_dim) -> (B,t_len,f_in)
int apply_unet(ad::Tape& t, const ad::ModelParams& p, const UnetParams& u, int x, int cond,
               int temb);

// Sinusoidal embedding of a denoising step index; deterministic and distinct
// for every k up to a few thousand.
ad::Tensor timestep_embedding(int k, int dim);

int64_t param_count(const ad::ModelParams& p, int group);

void register_unet_gradcheck();

}  // namespace hpga::net

#endif  // HPGA_NET_UNET_HPP_
