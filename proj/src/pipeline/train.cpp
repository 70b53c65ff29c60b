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

#include "hpga/pipeline/train.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hpga/ad/adam.hpp"
#include "hpga/policy/packing.hpp"
#include "hpga/policy/rollout.hpp"

namespace hpga::pipeline {

using ad::Tensor;
using diffusion::ActionSampler;
using diffusion::PolicyModel;

diffusion::ModelConfig model_config_from(const RunConfig& cfg) {
  cfg.validate();
  env::TaskSpec task = env::TaskSpec::by_name(cfg.task);
  diffusion::ModelConfig mc;
  mc.variant = net::variant_from_string(cfg.variant);
  mc.h_o = cfg.h_o;
  mc.h_p = cfg.h_p;
  mc.k_o = policy::observation_channels(task.j_objects);
  mc.k_a = policy::kActionChannels;
  mc.obs_raw_dim = policy::observation_raw_dim(task.j_objects);
  mc.act_raw_dim = policy::kActionRawDim;
  mc.k_max = cfg.k_max;
  mc.eta = cfg.eta;
  mc.schedule = diffusion::schedule_from_string(cfg.schedule);
  mc.pgatr.n_blocks = cfg.pgatr_blocks;
  mc.pgatr.channels = cfg.pgatr_channels;
  mc.pgatr.n_heads = cfg.pgatr_heads;
  mc.noise_encoded_latents = cfg.noise_encoded_latents;
  return mc;
}

std::unique_ptr<PolicyModel> build_model(const RunConfig& cfg) {
  return std::make_unique<PolicyModel>(model_config_from(cfg), cfg.seed);
}

WindowBatch sample_batch(const env::Dataset& data, const RunConfig& cfg, bool pgatr, Rng& rng) {
  if (data.episodes.empty()) throw std::invalid_argument("sample_batch: empty dataset");
  env::TaskSpec task = env::TaskSpec::by_name(cfg.task);
  int j = task.j_objects;
  int b = cfg.batch;

  WindowBatch out;
  if (pgatr) {
    out.obs = Tensor({b, cfg.h_o, policy::observation_channels(j), 16});
    out.act = Tensor({b, cfg.h_p, policy::kActionChannels, 16});
  } else {
    out.obs = Tensor({b, cfg.h_o, policy::observation_raw_dim(j)});
    out.act = Tensor({b, cfg.h_p, policy::kActionRawDim});
  }

  for (int bi = 0; bi < b; ++bi) {
    const policy::Episode& ep =
        data.episodes[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(data.episodes.size()) - 1))];
    int len = static_cast<int>(ep.obs.size());
    if (len < cfg.h_o) throw std::runtime_error("sample_batch: episode shorter than h_o");
    int t = rng.uniform_int(cfg.h_o - 1, len - 1);

    std::vector<policy::ObservationFrame> window(
        ep.obs.begin() + (t - cfg.h_o + 1), ep.obs.begin() + t + 1);
    std::vector<policy::ActionFrame> acts;
    acts.reserve(static_cast<size_t>(cfg.h_p));
    for (int i = 0; i < cfg.h_p; ++i) {
      int idx = std::min(t + i, len - 1);  // hold the last action past the end
      acts.push_back(ep.act[static_cast<size_t>(idx)]);
    }

    Tensor o = pgatr ? policy::pack_observation(window, j)
                     : policy::pack_observation_raw(window, j);
    Tensor a = pgatr ? policy::pack_actions(acts) : policy::pack_actions_raw(acts);
    int64_t on = o.numel(), an = a.numel();
    for (int64_t i = 0; i < on; ++i) out.obs[bi * on + i] = o[i];
    for (int64_t i = 0; i < an; ++i) out.act[bi * an + i] = a[i];
  }
  return out;
}

namespace {

// One in-flight rollout inside a lockstep evaluation batch.
struct EvalSlot {
  bool active = false;
  env::EnvState st;
  std::vector<policy::ObservationFrame> history;
  Rng rng{0};
  int steps = 0;
};

}  // namespace

double evaluate(const PolicyModel& model, const RunConfig& cfg, int n_rollouts, uint64_t seed) {
  env::TaskSpec task = env::TaskSpec::by_name(cfg.task);
  bool pgatr = model.uses_pgatr();
  int workers = std::max(1, cfg.eval_workers);
  std::atomic<int> successes{0};
  Rng base(seed);

  // Rollouts run in lockstep batches so the denoising loop amortizes across
  // slots; per-rollout seeds keep results identical for any batch or worker
  // count. Plans that decode to degenerate entities count as failures.
  auto work = [&](int worker) {
    std::vector<int> todo;
    for (int i = worker; i < n_rollouts; i += workers) todo.push_back(i);
    if (todo.empty()) return;
    int batch = std::min<int>(cfg.eval_batch, static_cast<int>(todo.size()));
    ActionSampler sampler(model, batch);
    Rng dummy(0x5eedu);

    std::vector<EvalSlot> slots(static_cast<size_t>(batch));
    size_t next = 0;
    auto assign = [&](EvalSlot& s) {
      if (next >= todo.size()) {
        s.active = false;
        return;
      }
      int idx = todo[next++];
      s.active = true;
      s.st = env::env_reset(task, Rng(seed).fork(2 * static_cast<uint64_t>(idx)).next());
      s.history.assign(static_cast<size_t>(cfg.h_o), env::observe(s.st, task));
      s.rng = base.fork(2 * static_cast<uint64_t>(idx) + 1);
      s.steps = 0;
    };
    for (EvalSlot& s : slots) assign(s);

    std::vector<int> obs_shape =
        pgatr ? std::vector<int>{batch, cfg.h_o, policy::observation_channels(task.j_objects), 16}
              : std::vector<int>{batch, cfg.h_o, policy::observation_raw_dim(task.j_objects)};
    for (;;) {
      bool any_active = false;
      for (const EvalSlot& s : slots) any_active |= s.active;
      if (!any_active) break;

      Tensor obs(obs_shape);
      int64_t inner = obs.numel() / batch;
      std::vector<Rng*> rngs(static_cast<size_t>(batch), &dummy);
      for (int b = 0; b < batch; ++b) {
        EvalSlot& s = slots[static_cast<size_t>(b)];
        if (!s.active) continue;
        Tensor o = pgatr ? policy::pack_observation(s.history, task.j_objects)
                         : policy::pack_observation_raw(s.history, task.j_objects);
        for (int64_t i = 0; i < inner; ++i) obs[b * inner + i] = o[i];
        rngs[static_cast<size_t>(b)] = &s.rng;
      }

      Tensor plans = sampler.sample_batch(obs, rngs);
      int64_t plan_inner = plans.numel() / batch;

      for (int b = 0; b < batch; ++b) {
        EvalSlot& s = slots[static_cast<size_t>(b)];
        if (!s.active) continue;
        Tensor row(std::vector<int>(plans.shape().begin() + 1, plans.shape().end()));
        for (int64_t i = 0; i < plan_inner; ++i) row[i] = plans[b * plan_inner + i];
        bool done = false, ok = false;
        try {
          std::vector<policy::ActionFrame> acts =
              pgatr ? policy::unpack_actions(row) : policy::unpack_actions_raw(row);
          for (int i = 0; i < cfg.h_a && s.steps < task.max_steps; ++i) {
            s.st = env::env_step(s.st, acts[static_cast<size_t>(i)], task);
            ++s.steps;
            s.history.erase(s.history.begin());
            s.history.push_back(env::observe(s.st, task));
            if (env::check_success(s.st, task)) {
              done = ok = true;
              break;
            }
          }
          if (!done && s.steps >= task.max_steps) done = true;
        } catch (const std::domain_error&) {
          done = true;  // degenerate decoded entity: the rollout failed
        }
        if (done) {
          if (ok) successes.fetch_add(1);
          assign(s);
        }
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& th : threads) th.join();
  }
  return static_cast<double>(successes.load()) / n_rollouts;
}

TrainingRun train_model(PolicyModel& model, const env::Dataset& data, const RunConfig& cfg,
                        const TrainOptions& opts) {
  cfg.validate();
  TrainingRun run;
  ad::AdamOptions aopt;
  aopt.lr = cfg.lr;
  aopt.weight_decay = cfg.weight_decay;
  ad::AdamW adam(model.params(), aopt);
  bool pgatr = model.uses_pgatr();
  int steps_per_epoch = cfg.windows_per_epoch / cfg.batch;
  int epochs = opts.max_epochs >= 0 ? opts.max_epochs : cfg.epochs;

  Rng root(cfg.seed);
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    Rng erng = root.fork(static_cast<uint64_t>(epoch));
    EpochMetrics em;
    em.epoch = epoch;
    for (int s = 0; s < steps_per_epoch; ++s) {
      WindowBatch batch = sample_batch(data, cfg, pgatr, erng);
      PolicyModel::StepResult r = model.train_step(batch.obs, batch.act, erng);
      adam.step(model.params());
      em.l_ed += r.l_ed;
      em.l_dec += r.l_dec;
      em.l_total += r.l_total;
    }
    em.l_ed /= steps_per_epoch;
    em.l_dec /= steps_per_epoch;
    em.l_total /= steps_per_epoch;
    em.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.metrics.push_back(em);

    if (opts.eval_every > 0 && epoch % opts.eval_every == 0) {
      double sr = evaluate(model, cfg, cfg.eval_rollouts, opts.eval_seed);
      run.evals.push_back({epoch, sr});
      if (opts.eval_threshold >= 0.0 && run.first_success_epoch < 0 &&
          sr >= opts.eval_threshold) {
        run.first_success_epoch = epoch;
        if (opts.stop_at_threshold) break;
      }
    }
  }

  if (!opts.metrics_path.empty()) write_metrics_csv(opts.metrics_path, cfg, run.metrics);
  return run;
}

void write_metrics_csv(const std::string& path, const RunConfig& cfg,
                       const std::vector<EpochMetrics>& metrics) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_metrics_csv: cannot open " + path);
  std::istringstream cfg_lines(cfg.serialize());
  std::string line;
  while (std::getline(cfg_lines, line)) os << "# " << line << "\n";
  os << "epoch,l_ed,l_dec,l_total,wall_s\n";
  char buf[256];
  for (const EpochMetrics& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.3f\n", m.epoch, m.l_ed, m.l_dec,
                  m.l_total, m.wall_s);
    os << buf;
  }
}

}  // namespace hpga::pipeline
