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

#include "hpga/pipeline/config.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "hpga/diffusion/schedule.hpp"
#include "hpga/env/tasks.hpp"
#include "hpga/net/backbones.hpp"

namespace hpga::pipeline {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string RunConfig::serialize() const {
  std::ostringstream os;
  os << "task = " << task << "\n";
  os << "variant = " << variant << "\n";
  os << "h_o = " << h_o << "\n";
  os << "h_p = " << h_p << "\n";
  os << "h_a = " << h_a << "\n";
  os << "k_max = " << k_max << "\n";
  os << "eta = " << fmt_double(eta) << "\n";
  os << "schedule = " << schedule << "\n";
  os << "epochs = " << epochs << "\n";
  os << "batch = " << batch << "\n";
  os << "lr = " << fmt_double(lr) << "\n";
  os << "weight_decay = " << fmt_double(weight_decay) << "\n";
  os << "windows_per_epoch = " << windows_per_epoch << "\n";
  os << "seed = " << seed << "\n";
  os << "eval_rollouts = " << eval_rollouts << "\n";
  os << "eval_workers = " << eval_workers << "\n";
  os << "eval_batch = " << eval_batch << "\n";
  os << "pgatr_blocks = " << pgatr_blocks << "\n";
  os << "pgatr_channels = " << pgatr_channels << "\n";
  os << "pgatr_heads = " << pgatr_heads << "\n";
  os << "noise_encoded_latents = " << (noise_encoded_latents ? "true" : "false") << "\n";
  os << "dataset_path = " << dataset_path << "\n";
  os << "out_dir = " << out_dir << "\n";
  os << "checkpoint_path = " << checkpoint_path << "\n";
  return os.str();
}

RunConfig RunConfig::deserialize(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 3);
    if (key == "task") c.task = val;
    else if (key == "variant") c.variant = val;
    else if (key == "h_o") c.h_o = std::stoi(val);
    else if (key == "h_p") c.h_p = std::stoi(val);
    else if (key == "h_a") c.h_a = std::stoi(val);
    else if (key == "k_max") c.k_max = std::stoi(val);
    else if (key == "eta") c.eta = std::stod(val);
    else if (key == "schedule") c.schedule = val;
    else if (key == "epochs") c.epochs = std::stoi(val);
    else if (key == "batch") c.batch = std::stoi(val);
    else if (key == "lr") c.lr = std::stod(val);
    else if (key == "weight_decay") c.weight_decay = std::stod(val);
    else if (key == "windows_per_epoch") c.windows_per_epoch = std::stoi(val);
    else if (key == "seed") c.seed = std::stoull(val);
    else if (key == "eval_rollouts") c.eval_rollouts = std::stoi(val);
    else if (key == "eval_workers") c.eval_workers = std::stoi(val);
    else if (key == "eval_batch") c.eval_batch = std::stoi(val);
    else if (key == "pgatr_blocks") c.pgatr_blocks = std::stoi(val);
    else if (key == "pgatr_channels") c.pgatr_channels = std::stoi(val);
    else if (key == "pgatr_heads") c.pgatr_heads = std::stoi(val);
    else if (key == "noise_encoded_latents") c.noise_encoded_latents = (val == "true");
    else if (key == "dataset_path") c.dataset_path = val;
    else if (key == "out_dir") c.out_dir = val;
    else if (key == "checkpoint_path") c.checkpoint_path = val;
    else throw std::invalid_argument("RunConfig: unknown key '" + key + "'");
  }
  return c;
}

void RunConfig::validate() const {
  env::TaskSpec::by_name(task);                    // throws on unknown task
  net::Variant v = net::variant_from_string(variant);
  diffusion::schedule_from_string(schedule);
  if (h_o < 1 || h_p < 1) throw std::invalid_argument("config: horizons must be >= 1");
  if (h_a < 1 || h_a > h_p) throw std::invalid_argument("config: need 1 <= h_a <= h_p");
  if (net::variant_is_unet(v) && h_p % 4 != 0) {
    throw std::invalid_argument("config: h_p must be divisible by 4 for U-Net variants");
  }
  if (k_max < 1) throw std::invalid_argument("config: k_max must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("config: eta must be in [0,1]");
  if (epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
  if (batch < 1) throw std::invalid_argument("config: batch must be >= 1");
  if (windows_per_epoch < batch || windows_per_epoch % batch != 0) {
    throw std::invalid_argument("config: windows_per_epoch must be a positive multiple of batch");
  }
  if (lr <= 0.0) throw std::invalid_argument("config: lr must be positive");
  if (eval_rollouts < 1) throw std::invalid_argument("config: eval_rollouts must be >= 1");
  if (eval_workers < 1) throw std::invalid_argument("config: eval_workers must be >= 1");
  if (eval_batch < 1) throw std::invalid_argument("config: eval_batch must be >= 1");
  if (pgatr_blocks < 1) throw std::invalid_argument("config: pgatr_blocks must be >= 1");
  if (pgatr_channels < 1 || pgatr_channels % pgatr_heads != 0) {
    throw std::invalid_argument("config: pgatr_channels must be a positive multiple of heads");
  }
}

}  // namespace hpga::pipeline
