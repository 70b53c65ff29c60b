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

#ifndef HPGA_PIPELINE_TRAIN_HPP_
#define HPGA_PIPELINE_TRAIN_HPP_

#include <memory>
#include <string>
#include <vector>

#include "hpga/diffusion/diffusion.hpp"
#include "hpga/env/dataset.hpp"
#include "hpga/pipeline/config.hpp"

namespace hpga::pipeline {

struct EpochMetrics {
  int epoch = 0;
  double l_ed = 0.0, l_dec = 0.0, l_total = 0.0, wall_s = 0.0;
};

struct EvalPoint {
  int epoch = 0;
  double success_rate = 0.0;
};

struct TrainingRun {
  std::vector<EpochMetrics> metrics;
  std::vector<EvalPoint> evals;
  int first_success_epoch = -1;  // first evaluated epoch reaching the threshold
};

struct TrainOptions {
  std::string metrics_path;     // per-epoch CSV with config echo; empty = none
  int eval_every = 0;           // 0 = never evaluate during training
  double eval_threshold = -1.0; // record first epoch with success >= threshold
  bool stop_at_threshold = false;
  uint64_t eval_seed = 99;
  int max_epochs = -1;          // override cfg.epochs when >= 0
};

diffusion::ModelConfig model_config_from(const RunConfig& cfg);
std::unique_ptr<diffusion::PolicyModel> build_model(const RunConfig& cfg);

// One training batch of packed windows sampled uniformly over (episode, t).
struct WindowBatch {
  ad::Tensor obs, act;
};
WindowBatch sample_batch(const env::Dataset& data, const RunConfig& cfg, bool pgatr, Rng& rng);

// Success rate over n seeded rollouts, parallelized across eval_workers.
double evaluate(const diffusion::PolicyModel& model, const RunConfig& cfg, int n_rollouts,
                uint64_t seed);

TrainingRun train_model(diffusion::PolicyModel& model, const env::Dataset& data,
                        const RunConfig& cfg, const TrainOptions& opts);

void write_metrics_csv(const std::string& path, const RunConfig& cfg,
                       const std::vector<EpochMetrics>& metrics);

}  // namespace hpga::pipeline

#endif  // HPGA_PIPELINE_TRAIN_HPP_
