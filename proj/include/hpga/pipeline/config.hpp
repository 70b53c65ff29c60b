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

#ifndef HPGA_PIPELINE_CONFIG_HPP_
#define HPGA_PIPELINE_CONFIG_HPP_

#include <cstdint>
#include <string>

namespace hpga::pipeline {

// Declarative run configuration shared by every CLI subcommand; the
// serialized form is echoed into output artifacts so runs are auditable.
struct RunConfig {
  std::string task = "point_reach";
  std::string variant = "hpga_u";
  int h_o = 2;
  int h_p = 16;
  int h_a = 8;
  int k_max = 100;
  double eta = 0.25;
  std::string schedule = "cosine";
  int epochs = 10;
  int batch = 16;
  double lr = 1e-4;
  double weight_decay = 1e-6;
  int windows_per_epoch = 1024;
  uint64_t seed = 1;
  int eval_rollouts = 50;
  int eval_workers = 2;
  int eval_batch = 8;  // lockstep rollouts per evaluation worker
  int pgatr_blocks = 4;
  int pgatr_channels = 16;
  int pgatr_heads = 4;
  bool noise_encoded_latents = false;
  std::string dataset_path;
  std::string out_dir = ".";
  std::string checkpoint_path;

  // One "key = value" line per field, fixed order.
  std::string serialize() const;
  static RunConfig deserialize(const std::string& text);

  // Cross-checks against module preconditions; throws std::invalid_argument.
  void validate() const;
};

}  // namespace hpga::pipeline

#endif  // HPGA_PIPELINE_CONFIG_HPP_
