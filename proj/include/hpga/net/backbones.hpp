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

#ifndef HPGA_NET_BACKBONES_HPP_
#define HPGA_NET_BACKBONES_HPP_

#include <stdexcept>
#include <string>

#include "hpga/net/transformer.hpp"
#include "hpga/net/unet.hpp"

// Interchangeable noise-prediction backbones. The geometric variants feed
// flattened multivector latents (channel-major within each time step); the
// baselines feed raw pose/gripper vectors. Either way the backbone itself is
// a plain U-Net or transformer with no geometric structure.

namespace hpga::net {

enum class Variant { kHpgaU, kHpgaT, kBaselineU, kBaselineT };

inline Variant variant_from_string(const std::string& s) {
  if (s == "hpga_u") return Variant::kHpgaU;
  if (s == "hpga_t") return Variant::kHpgaT;
  if (s == "baseline_u") return Variant::kBaselineU;
  if (s == "baseline_t") return Variant::kBaselineT;
  throw std::invalid_argument("unknown variant: " + s);
}

inline std::string variant_to_string(Variant v) {
  switch (v) {
    case Variant::kHpgaU: return "hpga_u";
    case Variant::kHpgaT: return "hpga_t";
    case Variant::kBaselineU: return "baseline_u";
    case Variant::kBaselineT: return "baseline_t";
  }
  return "?";
}

inline bool variant_uses_pgatr(Variant v) {
  return v == Variant::kHpgaU || v == Variant::kHpgaT;
}
inline bool variant_is_unet(Variant v) {
  return v == Variant::kHpgaU || v == Variant::kBaselineU;
}

struct Denoiser {
  bool is_unet = true;
  UnetParams unet;
  TransformerParams transformer;
  int t_len = 0, f_in = 0;
  int cond_tokens = 0, cond_feat = 0;
  int temb_dim = 64;
};

// t_len action tokens of f_in features, conditioned on cond_tokens x
// cond_feat observation features plus the sinusoidal step embedding.
Denoiser make_denoiser(ad::ModelParams& p, int group, const std::string& name, bool is_unet,
                       int t_len, int f_in, int cond_tokens, int cond_feat, Rng& rng);

// x (B, t_len, f_in), cond (B, cond_tokens, cond_feat), temb (B, temb_dim).
int apply_denoiser(ad::Tape& t, const ad::ModelParams& p, const Denoiser& d, int x, int cond,
                   int temb);

}  // namespace hpga::net

#endif  // HPGA_NET_BACKBONES_HPP_
