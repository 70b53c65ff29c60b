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

#ifndef HPGA_DIFFUSION_DIFFUSION_HPP_
#define HPGA_DIFFUSION_DIFFUSION_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "hpga/ad/tape.hpp"
#include "hpga/diffusion/schedule.hpp"
#include "hpga/net/backbones.hpp"
#include "hpga/net/pgatr.hpp"

namespace hpga::diffusion {

using ad::Tensor;

// -- diffusion algebra ---------------------------------------------------------

// K_max - floor(eta * K_max); throws for eta outside [0, 1].
int k_threshold(double eta, int k_max);

struct StagedLossConfig {
  double eta = 0.25;
  int k_thresh = 75;
  static StagedLossConfig make(double eta, int k_max) {
    return {eta, k_threshold(eta, k_max)};
  }
};

// sqrt(alpha_bar_k) z0 + sqrt(1 - alpha_bar_k) eps; throws for k out of range.
Tensor forward_noise(const Tensor& z0, int k, const Tensor& eps, const NoiseSchedule& s);

// (zk - sqrt(1 - alpha_bar_k) eps_hat) / sqrt(alpha_bar_k); throws
// std::domain_error when alpha_bar_k <= 1e-12.
Tensor recover_z0(const Tensor& zk, const Tensor& eps_hat, int k, const NoiseSchedule& s);

double loss_encode_denoise(const Tensor& eps_hat, const Tensor& eps);
// Mean squared error when k >= k_thresh, exactly zero otherwise.
double loss_decoder(const Tensor& decoded, const Tensor& target, int k,
                    const StagedLossConfig& cfg);
double total_loss(double l_ed, double l_dec);

// DDPM ancestral sampling: from unit Gaussian noise, steps k = k_max..1 with
// the standard posterior, no noise on the final step. `eps_fn` predicts the
// noise for the current latent and step.
Tensor ddpm_sample(const std::function<Tensor(const Tensor&, int)>& eps_fn,
                   const std::vector<int>& shape, const NoiseSchedule& s, Rng& rng);

// Lockstep variant over shape (B, ...): slot b draws all of its noise from
// rngs[b], so each slot's trajectory is independent of how samples are
// grouped into batches.
Tensor ddpm_sample_multi(const std::function<Tensor(const Tensor&, int)>& eps_fn,
                         const std::vector<int>& shape, const NoiseSchedule& s,
                         const std::vector<Rng*>& rngs);

// -- policy model ----------------------------------------------------------------

struct ModelConfig {
  net::Variant variant = net::Variant::kHpgaU;
  int h_o = 2;
  int h_p = 16;
  int k_o = 5;          // observation entity channels (3 + 2J)
  int k_a = 3;          // action entity channels
  int obs_raw_dim = 15; // per-frame raw features for the baselines
  int act_raw_dim = 8;
  int k_max = 100;
  double eta = 0.25;
  ScheduleKind schedule = ScheduleKind::kCosine;
  net::PgatrConfig pgatr;
  // optional mode: noise an encoded action latent instead of the raw action
  // multivectors (the default follows the training-on-x_a description)
  bool noise_encoded_latents = false;
  // recovered latents are clipped to [-z0_clip, z0_clip] before decoding;
  // early in training the one-shot recovery at high k is amplified by
  // 1/sqrt(alpha_bar) and would otherwise blow up the decoder objective
  double z0_clip = 3.0;
};

// Encoder/denoiser/decoder assembly with a reusable training tape. Parameter
// groups are "encoder", "denoiser", "decoder" (the first and last stay empty
// for the raw-vector baselines).
class PolicyModel {
 public:
  PolicyModel(const ModelConfig& cfg, uint64_t seed);

  const ModelConfig& cfg() const { return cfg_; }
  ad::ModelParams& params() { return params_; }
  const ad::ModelParams& params() const { return params_; }
  const NoiseSchedule& schedule() const { return sched_; }
  const StagedLossConfig& staged() const { return staged_; }
  bool uses_pgatr() const { return net::variant_uses_pgatr(cfg_.variant); }
  int denoiser_features() const;        // f_in of the backbone
  int64_t denoiser_param_count() const;
  int group_encoder() const { return g_enc_; }
  int group_denoiser() const { return g_den_; }
  int group_decoder() const { return g_dec_; }

  struct StepResult {
    double l_ed = 0.0, l_dec = 0.0, l_total = 0.0;
  };

  // One training step on a packed batch: samples per-sample steps k and unit
  // Gaussian noise, runs the staged objective, and accumulates parameter
  // gradients (grads are zeroed first). obs/act are (B,Ho,Ko,16)/(B,Hp,Ka,16)
  // for the geometric variants and (B,Ho,obs_raw)/(B,Hp,act_raw) for the
  // baselines. Throws std::invalid_argument on an empty batch.
  StepResult train_step(const Tensor& obs, const Tensor& act, Rng& rng);
  // Same but with caller-chosen denoising steps (one per sample).
  StepResult train_step_with_ks(const Tensor& obs, const Tensor& act,
                                const std::vector<int>& ks, Rng& rng);

  friend class ActionSampler;

 private:
  void build_train_tape(int batch);

  ModelConfig cfg_;
  ad::ModelParams params_;
  int g_enc_ = -1, g_den_ = -1, g_dec_ = -1;
  net::PgatrNet encoder_, decoder_;
  std::optional<net::PgatrNet> action_encoder_;
  net::Denoiser denoiser_;
  NoiseSchedule sched_;
  StagedLossConfig staged_;

  // reusable training graph
  std::optional<ad::Tape> tape_;
  int tape_batch_ = 0;
  int obs_leaf_ = -1, act_leaf_ = -1, eps_leaf_ = -1;
  int sab_ = -1, s1mab_ = -1, inv_sab_ = -1, coef2_ = -1, mask_ = -1, temb_ = -1;
  int l_ed_node_ = -1, l_dec_node_ = -1, l_total_node_ = -1;
};

// Per-thread inference engine; builds fixed-batch tapes once and replays
// them through the denoising loop. Call refresh() after parameter updates.
class ActionSampler {
 public:
  explicit ActionSampler(const PolicyModel& model, int batch = 1);

  void refresh();
  // obs (1,Ho,Ko,16) -> (Hp,Ka,16), or raw obs (1,Ho,obs_raw) -> (Hp,act_raw).
  // Requires batch == 1.
  Tensor sample(const Tensor& obs, Rng& rng);
  // obs (B,Ho,...) -> (B,Hp,...); one independent noise stream per slot.
  Tensor sample_batch(const Tensor& obs, const std::vector<Rng*>& rngs);

 private:
  const PolicyModel* m_;
  int batch_;
  ad::Tape enc_tape_, den_tape_, dec_tape_;
  int enc_in_ = -1, enc_out_ = -1;
  int den_z_ = -1, den_cond_ = -1, den_temb_ = -1, den_out_ = -1;
  int dec_in_ = -1, dec_out_ = -1;
};

}  // namespace hpga::diffusion

#endif  // HPGA_DIFFUSION_DIFFUSION_HPP_
