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

#include "hpga/diffusion/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "hpga/ad/ops.hpp"

namespace hpga::diffusion {

using namespace hpga::ad;

int k_threshold(double eta, int k_max) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("k_threshold: eta must lie in [0, 1]");
  }
  return k_max - static_cast<int>(std::floor(eta * k_max));
}

Tensor forward_noise(const Tensor& z0, int k, const Tensor& eps, const NoiseSchedule& s) {
  if (k < 0 || k > s.k_max()) throw std::invalid_argument("forward_noise: k out of range");
  if (!z0.same_shape(eps)) throw std::invalid_argument("forward_noise: shape mismatch");
  double a = std::sqrt(s.alpha_bar(k));
  double b = std::sqrt(1.0 - s.alpha_bar(k));
  Tensor out(z0.shape());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a * z0[i] + b * eps[i];
  return out;
}

Tensor recover_z0(const Tensor& zk, const Tensor& eps_hat, int k, const NoiseSchedule& s) {
  if (k < 0 || k > s.k_max()) throw std::invalid_argument("recover_z0: k out of range");
  if (!zk.same_shape(eps_hat)) throw std::invalid_argument("recover_z0: shape mismatch");
  double ab = s.alpha_bar(k);
  if (ab <= 1e-12) throw std::domain_error("recover_z0: alpha_bar too small to invert");
  double inv = 1.0 / std::sqrt(ab);
  double c = std::sqrt(1.0 - ab);
  Tensor out(zk.shape());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = inv * (zk[i] - c * eps_hat[i]);
  return out;
}

double loss_encode_denoise(const Tensor& eps_hat, const Tensor& eps) {
  if (!eps_hat.same_shape(eps)) throw std::invalid_argument("loss_encode_denoise: shapes");
  double s = 0.0;
  for (int64_t i = 0; i < eps.numel(); ++i) {
    double d = eps_hat[i] - eps[i];
    s += d * d;
  }
  return s / static_cast<double>(eps.numel());
}

double loss_decoder(const Tensor& decoded, const Tensor& target, int k,
                    const StagedLossConfig& cfg) {
  if (!decoded.same_shape(target)) throw std::invalid_argument("loss_decoder: shapes");
  if (k < cfg.k_thresh) return 0.0;
  return loss_encode_denoise(decoded, target);
}

double total_loss(double l_ed, double l_dec) { return l_ed + l_dec; }

Tensor ddpm_sample(const std::function<Tensor(const Tensor&, int)>& eps_fn,
                   const std::vector<int>& shape, const NoiseSchedule& s, Rng& rng) {
  return ddpm_sample_multi(eps_fn, shape, s, {&rng});
}

Tensor ddpm_sample_multi(const std::function<Tensor(const Tensor&, int)>& eps_fn,
                         const std::vector<int>& shape, const NoiseSchedule& s,
                         const std::vector<Rng*>& rngs) {
  int b = shape[0];
  if (static_cast<int>(rngs.size()) != b) {
    throw std::invalid_argument("ddpm_sample_multi: one rng per slot required");
  }
  Tensor z(shape);
  int64_t inner = z.numel() / b;
  for (int bi = 0; bi < b; ++bi) {
    double* zp = z.data() + bi * inner;
    for (int64_t i = 0; i < inner; ++i) zp[i] = rngs[static_cast<size_t>(bi)]->normal();
  }
  for (int k = s.k_max(); k >= 1; --k) {
    Tensor eps = eps_fn(z, k);
    double inv_sqrt_alpha = 1.0 / std::sqrt(s.alpha(k));
    double coef = s.beta(k) / std::sqrt(1.0 - s.alpha_bar(k));
    for (int64_t i = 0; i < z.numel(); ++i) z[i] = inv_sqrt_alpha * (z[i] - coef * eps[i]);
    if (k > 1) {
      double sigma = s.posterior_sigma(k);
      for (int bi = 0; bi < b; ++bi) {
        double* zp = z.data() + bi * inner;
        for (int64_t i = 0; i < inner; ++i) zp[i] += sigma * rngs[static_cast<size_t>(bi)]->normal();
      }
    }
  }
  return z;
}

// -- PolicyModel -----------------------------------------------------------------

PolicyModel::PolicyModel(const ModelConfig& cfg, uint64_t seed)
    : cfg_(cfg), sched_(make_schedule(cfg.k_max, cfg.schedule)),
      staged_(StagedLossConfig::make(cfg.eta, cfg.k_max)) {
  Rng rng(seed);
  g_enc_ = params_.add_group("encoder");
  g_den_ = params_.add_group("denoiser");
  g_dec_ = params_.add_group("decoder");
  bool pgatr = net::variant_uses_pgatr(cfg_.variant);
  int f_in = pgatr ? cfg_.k_a * 16 : cfg_.act_raw_dim;
  int cond_feat = pgatr ? cfg_.k_o * 16 : cfg_.obs_raw_dim;
  if (pgatr) {
    encoder_ = net::make_pgatr_net(params_, g_enc_, "enc", cfg_.pgatr, cfg_.h_o, cfg_.k_o, rng);
    decoder_ = net::make_pgatr_net(params_, g_dec_, "dec", cfg_.pgatr, cfg_.h_p, cfg_.k_a, rng);
    if (cfg_.noise_encoded_latents) {
      action_encoder_ =
          net::make_pgatr_net(params_, g_enc_, "act_enc", cfg_.pgatr, cfg_.h_p, cfg_.k_a, rng);
    }
  }
  denoiser_ = net::make_denoiser(params_, g_den_, "den", net::variant_is_unet(cfg_.variant),
                                 cfg_.h_p, f_in, cfg_.h_o, cond_feat, rng);
}

int PolicyModel::denoiser_features() const {
  return uses_pgatr() ? cfg_.k_a * 16 : cfg_.act_raw_dim;
}

int64_t PolicyModel::denoiser_param_count() const { return params_.group_size(g_den_); }

void PolicyModel::build_train_tape(int batch) {
  tape_.emplace();
  tape_batch_ = batch;
  Tape& t = *tape_;
  bool pgatr = uses_pgatr();
  int f_in = denoiser_features();
  int cond_feat = pgatr ? cfg_.k_o * 16 : cfg_.obs_raw_dim;

  if (pgatr) {
    obs_leaf_ = t.leaf(Tensor({batch, cfg_.h_o, cfg_.k_o, 16}));
    act_leaf_ = t.leaf(Tensor({batch, cfg_.h_p, cfg_.k_a, 16}));
    eps_leaf_ = t.leaf(Tensor({batch, cfg_.h_p, cfg_.k_a, 16}));
  } else {
    obs_leaf_ = t.leaf(Tensor({batch, cfg_.h_o, cfg_.obs_raw_dim}));
    act_leaf_ = t.leaf(Tensor({batch, cfg_.h_p, cfg_.act_raw_dim}));
    eps_leaf_ = t.leaf(Tensor({batch, cfg_.h_p, cfg_.act_raw_dim}));
  }
  sab_ = t.leaf(Tensor({batch}));
  s1mab_ = t.leaf(Tensor({batch}));
  inv_sab_ = t.leaf(Tensor({batch}));
  coef2_ = t.leaf(Tensor({batch}));
  mask_ = t.leaf(Tensor({batch}));
  temb_ = t.leaf(Tensor({batch, denoiser_.temb_dim}));

  int cond;
  int z0 = act_leaf_;
  if (pgatr) {
    int z_o = net::apply_pgatr_net(t, params_, encoder_, obs_leaf_);
    cond = reshape(t, z_o, {batch, cfg_.h_o, cond_feat});
    if (action_encoder_) z0 = net::apply_pgatr_net(t, params_, *action_encoder_, act_leaf_);
  } else {
    cond = obs_leaf_;
  }

  int zk = add(t, mul_bcast0(t, z0, sab_), mul_bcast0(t, eps_leaf_, s1mab_));
  int zk_flat = pgatr ? reshape(t, zk, {batch, cfg_.h_p, f_in}) : zk;
  int eps_hat = net::apply_denoiser(t, params_, denoiser_, zk_flat, cond, temb_);
  int eps_flat = pgatr ? reshape(t, eps_leaf_, {batch, cfg_.h_p, f_in}) : eps_leaf_;
  l_ed_node_ = mse(t, eps_hat, eps_flat);

  if (pgatr) {
    int eps_hat_mv = reshape(t, eps_hat, {batch, cfg_.h_p, cfg_.k_a, 16});
    int zhat0 = sub(t, mul_bcast0(t, zk, inv_sab_), mul_bcast0(t, eps_hat_mv, coef2_));
    zhat0 = clamp(t, zhat0, -cfg_.z0_clip, cfg_.z0_clip);
    int decoded = net::apply_pgatr_net(t, params_, decoder_, zhat0);
    int per_sample = mse_per_sample(t, decoded, act_leaf_);
    l_dec_node_ = scale(t, sum_all(t, mul(t, per_sample, mask_)), 1.0 / batch);
    l_total_node_ = add(t, l_ed_node_, l_dec_node_);
  } else {
    l_dec_node_ = -1;
    l_total_node_ = l_ed_node_;
  }
}

PolicyModel::StepResult PolicyModel::train_step(const Tensor& obs, const Tensor& act,
                                                Rng& rng) {
  if (obs.rank() < 1 || obs.dim(0) < 1) throw std::invalid_argument("train_step: empty batch");
  int batch = obs.dim(0);
  std::vector<int> ks(static_cast<size_t>(batch));
  for (int& k : ks) k = rng.uniform_int(1, cfg_.k_max);
  return train_step_with_ks(obs, act, ks, rng);
}

PolicyModel::StepResult PolicyModel::train_step_with_ks(const Tensor& obs, const Tensor& act,
                                                        const std::vector<int>& ks, Rng& rng) {
  int batch = obs.dim(0);
  if (batch < 1) throw std::invalid_argument("train_step: empty batch");
  if (static_cast<int>(ks.size()) != batch) {
    throw std::invalid_argument("train_step: one k per sample required");
  }
  if (!tape_ || tape_batch_ != batch) build_train_tape(batch);
  Tape& t = *tape_;

  t.set_leaf(obs_leaf_, obs);
  t.set_leaf(act_leaf_, act);
  Tensor eps = Tensor::randn(t.value(eps_leaf_).shape(), rng);
  t.set_leaf(eps_leaf_, eps);

  Tensor sab({batch}), s1mab({batch}), inv_sab({batch}), coef2({batch}), mask({batch});
  Tensor temb({batch, denoiser_.temb_dim});
  for (int b = 0; b < batch; ++b) {
    int k = ks[static_cast<size_t>(b)];
    if (k < 1 || k > cfg_.k_max) throw std::invalid_argument("train_step: k out of range");
    double ab = sched_.alpha_bar(k);
    sab[b] = std::sqrt(ab);
    s1mab[b] = std::sqrt(1.0 - ab);
    inv_sab[b] = 1.0 / std::sqrt(ab);
    coef2[b] = std::sqrt(1.0 - ab) / std::sqrt(ab);
    mask[b] = (k >= staged_.k_thresh) ? 1.0 : 0.0;
    Tensor e = net::timestep_embedding(k, denoiser_.temb_dim);
    for (int i = 0; i < denoiser_.temb_dim; ++i) temb.at(b, i) = e[i];
  }
  t.set_leaf(sab_, sab);
  t.set_leaf(s1mab_, s1mab);
  t.set_leaf(inv_sab_, inv_sab);
  t.set_leaf(coef2_, coef2);
  t.set_leaf(mask_, mask);
  t.set_leaf(temb_, temb);

  t.refresh_params(params_);
  t.replay();
  t.zero_grads();
  params_.zero_grads();
  t.backward_scalar(l_total_node_);
  t.accumulate_param_grads(params_);

  StepResult r;
  r.l_ed = t.value(l_ed_node_)[0];
  r.l_dec = l_dec_node_ >= 0 ? t.value(l_dec_node_)[0] : 0.0;
  r.l_total = t.value(l_total_node_)[0];
  return r;
}

// -- ActionSampler ---------------------------------------------------------------

ActionSampler::ActionSampler(const PolicyModel& model, int batch)
    : m_(&model), batch_(batch) {
  if (batch_ < 1) throw std::invalid_argument("ActionSampler: batch must be >= 1");
  const ModelConfig& cfg = m_->cfg_;
  bool pgatr = m_->uses_pgatr();
  int f_in = m_->denoiser_features();
  int cond_feat = pgatr ? cfg.k_o * 16 : cfg.obs_raw_dim;

  if (pgatr) {
    enc_in_ = enc_tape_.leaf(Tensor({batch_, cfg.h_o, cfg.k_o, 16}));
    int z_o = net::apply_pgatr_net(enc_tape_, m_->params_, m_->encoder_, enc_in_);
    enc_out_ = reshape(enc_tape_, z_o, {batch_, cfg.h_o, cond_feat});
  }

  den_z_ = den_tape_.leaf(Tensor({batch_, cfg.h_p, f_in}));
  den_cond_ = den_tape_.leaf(Tensor({batch_, cfg.h_o, cond_feat}));
  den_temb_ = den_tape_.leaf(Tensor({batch_, m_->denoiser_.temb_dim}));
  den_out_ = net::apply_denoiser(den_tape_, m_->params_, m_->denoiser_, den_z_, den_cond_,
                                 den_temb_);

  if (pgatr) {
    dec_in_ = dec_tape_.leaf(Tensor({batch_, cfg.h_p, cfg.k_a, 16}));
    // match training: the decoder only ever sees clipped latents
    int clipped = clamp(dec_tape_, dec_in_, -cfg.z0_clip, cfg.z0_clip);
    dec_out_ = net::apply_pgatr_net(dec_tape_, m_->params_, m_->decoder_, clipped);
  }
}

void ActionSampler::refresh() {
  if (m_->uses_pgatr()) {
    enc_tape_.refresh_params(m_->params_);
    dec_tape_.refresh_params(m_->params_);
  }
  den_tape_.refresh_params(m_->params_);
}

Tensor ActionSampler::sample(const Tensor& obs, Rng& rng) {
  if (batch_ != 1) throw std::logic_error("ActionSampler::sample: built with batch != 1");
  Tensor out = sample_batch(obs, {&rng});
  std::vector<int> shape(out.shape().begin() + 1, out.shape().end());
  return out.reshaped(shape);
}

Tensor ActionSampler::sample_batch(const Tensor& obs, const std::vector<Rng*>& rngs) {
  const ModelConfig& cfg = m_->cfg_;
  bool pgatr = m_->uses_pgatr();
  int f_in = m_->denoiser_features();
  if (obs.dim(0) != batch_) throw std::invalid_argument("sample_batch: batch mismatch");

  Tensor cond;
  if (pgatr) {
    enc_tape_.set_leaf(enc_in_, obs);
    enc_tape_.replay();
    cond = enc_tape_.value(enc_out_);
  } else {
    cond = obs;
  }
  den_tape_.set_leaf(den_cond_, cond);

  Tensor temb({batch_, m_->denoiser_.temb_dim});
  auto eps_fn = [&](const Tensor& z, int k) {
    den_tape_.set_leaf(den_z_, z);
    Tensor e = net::timestep_embedding(k, m_->denoiser_.temb_dim);
    for (int b = 0; b < batch_; ++b) {
      for (int i = 0; i < m_->denoiser_.temb_dim; ++i) temb.at(b, i) = e[i];
    }
    den_tape_.set_leaf(den_temb_, temb);
    den_tape_.replay();
    return den_tape_.value(den_out_);
  };
  Tensor z = ddpm_sample_multi(eps_fn, {batch_, cfg.h_p, f_in}, m_->sched_, rngs);

  if (pgatr) {
    dec_tape_.set_leaf(dec_in_, z.reshaped({batch_, cfg.h_p, cfg.k_a, 16}));
    dec_tape_.replay();
    return dec_tape_.value(dec_out_);  // (B, h_p, k_a, 16)
  }
  return z;  // (B, h_p, act_raw_dim)
}

}  // namespace hpga::diffusion
