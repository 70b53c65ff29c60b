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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hpga/env/dataset.hpp"
#include "hpga/pipeline/train.hpp"

namespace {

using hpga::pipeline::RunConfig;

void bind_config(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--task", cfg.task, "task name (point_reach | lift_toy)");
  sub->add_option("--variant", cfg.variant, "hpga_u | hpga_t | baseline_u | baseline_t");
  sub->add_option("--h_o", cfg.h_o, "observation horizon");
  sub->add_option("--h_p", cfg.h_p, "action prediction horizon");
  sub->add_option("--h_a", cfg.h_a, "actions executed per replan");
  sub->add_option("--k_max", cfg.k_max, "number of denoising steps");
  sub->add_option("--eta", cfg.eta, "decoder supervision fraction");
  sub->add_option("--schedule", cfg.schedule, "cosine | linear_beta");
  sub->add_option("--epochs", cfg.epochs, "training epochs");
  sub->add_option("--batch", cfg.batch, "batch size");
  sub->add_option("--lr", cfg.lr, "learning rate");
  sub->add_option("--weight_decay", cfg.weight_decay, "decoupled weight decay");
  sub->add_option("--windows_per_epoch", cfg.windows_per_epoch, "training windows per epoch");
  sub->add_option("--seed", cfg.seed, "run seed");
  sub->add_option("--eval_rollouts", cfg.eval_rollouts, "rollouts per evaluation");
  sub->add_option("--eval_workers", cfg.eval_workers, "parallel evaluation workers");
  sub->add_option("--eval_batch", cfg.eval_batch, "lockstep rollouts per evaluation worker");
  sub->add_option("--pgatr_blocks", cfg.pgatr_blocks, "encoder/decoder blocks");
  sub->add_option("--pgatr_channels", cfg.pgatr_channels, "encoder/decoder channels");
  sub->add_option("--pgatr_heads", cfg.pgatr_heads, "encoder/decoder attention heads");
  sub->add_flag("--noise_encoded_latents", cfg.noise_encoded_latents,
                "noise an encoded action latent instead of raw action multivectors");
  sub->add_option("--dataset", cfg.dataset_path, "dataset JSONL path");
  sub->add_option("--out_dir", cfg.out_dir, "output directory");
  sub->add_option("--checkpoint", cfg.checkpoint_path, "checkpoint path");
  sub->set_config("--config", "", "read options from a key = value file");
}

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || dir == ".") return file;
  return dir + "/" + file;
}

int cmd_generate(const RunConfig& cfg, int episodes, const std::string& out) {
  hpga::env::TaskSpec spec = hpga::env::TaskSpec::by_name(cfg.task);
  hpga::env::generate_dataset(spec, episodes, cfg.seed, out);
  std::cout << "wrote " << episodes << " episodes to " << out << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.dataset_path.empty()) throw std::runtime_error("train: --dataset is required");
  hpga::env::Dataset data = hpga::env::load_dataset(cfg.dataset_path);
  auto model = hpga::pipeline::build_model(cfg);
  hpga::pipeline::TrainOptions opts;
  opts.metrics_path = join_path(cfg.out_dir, "metrics.csv");
  hpga::pipeline::TrainingRun run = hpga::pipeline::train_model(*model, data, cfg, opts);
  std::string ckpt = cfg.checkpoint_path.empty() ? join_path(cfg.out_dir, "checkpoint.bin")
                                                 : cfg.checkpoint_path;
  model->params().save(ckpt);
  if (!run.metrics.empty()) {
    std::printf("epoch %d: l_ed=%.6f l_dec=%.6f l_total=%.6f\n", run.metrics.back().epoch,
                run.metrics.back().l_ed, run.metrics.back().l_dec, run.metrics.back().l_total);
  }
  std::cout << "metrics: " << opts.metrics_path << "\ncheckpoint: " << ckpt << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.checkpoint_path.empty()) throw std::runtime_error("eval: --checkpoint is required");
  auto model = hpga::pipeline::build_model(cfg);
  model->params().load(cfg.checkpoint_path);
  double sr = hpga::pipeline::evaluate(*model, cfg, cfg.eval_rollouts, cfg.seed);
  std::string path = join_path(cfg.out_dir, "eval.csv");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("eval: cannot open " + path);
  std::istringstream cfg_lines(cfg.serialize());
  std::string line;
  while (std::getline(cfg_lines, line)) os << "# " << line << "\n";
  os << "variant,eta,trial,success_rate,epochs_trained\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s,%.17g,%d,%.17g,%d\n", cfg.variant.c_str(), cfg.eta, 0, sr,
                cfg.epochs);
  os << buf;
  std::printf("success_rate %.4f over %d rollouts\n", sr, cfg.eval_rollouts);
  std::cout << "eval csv: " << path << "\n";
  return 0;
}

int cmd_ablate_eta(const RunConfig& base, const std::vector<double>& grid, int trials) {
  base.validate();
  if (base.dataset_path.empty()) throw std::runtime_error("ablate-eta: --dataset is required");
  hpga::env::Dataset data = hpga::env::load_dataset(base.dataset_path);
  std::string path = join_path(base.out_dir, "ablate_eta.csv");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ablate-eta: cannot open " + path);
  std::istringstream cfg_lines(base.serialize());
  std::string line;
  while (std::getline(cfg_lines, line)) os << "# " << line << "\n";
  os << "variant,eta,trial,success_rate,epochs_trained\n";
  for (double eta : grid) {
    for (int trial = 0; trial < trials; ++trial) {
      RunConfig cfg = base;
      cfg.eta = eta;
      cfg.seed = base.seed + 1000 * static_cast<uint64_t>(trial + 1);
      auto model = hpga::pipeline::build_model(cfg);
      hpga::pipeline::TrainOptions opts;
      hpga::pipeline::train_model(*model, data, cfg, opts);
      double sr = hpga::pipeline::evaluate(*model, cfg, cfg.eval_rollouts, cfg.seed + 7);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%s,%.17g,%d,%.17g,%d\n", cfg.variant.c_str(), eta, trial,
                    sr, cfg.epochs);
      os << buf;
      os.flush();
      std::printf("eta=%.2f trial=%d success_rate=%.4f\n", eta, trial, sr);
    }
  }
  std::cout << "ablation csv: " << path << "\n";
  return 0;
}

int cmd_export_metrics(const std::vector<std::string>& inputs, const std::string& out) {
  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error("export-metrics: cannot open " + out);
  os << "source,epoch,l_ed,l_dec,l_total,wall_s\n";
  for (const std::string& in : inputs) {
    std::ifstream is(in);
    if (!is) throw std::runtime_error("export-metrics: cannot open " + in);
    std::string line;
    bool past_header = false;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!past_header) {  // skip the column header of each input
        past_header = true;
        continue;
      }
      os << in << "," << line << "\n";
    }
  }
  std::cout << "merged " << inputs.size() << " files into " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid geometric-algebra diffusion policy: data, training, evaluation"};
  app.require_subcommand(1);

  RunConfig cfg;
  int episodes = 200;
  std::string out = "dataset.jsonl";
  std::vector<double> grid = {0.25, 0.5, 0.75};
  int trials = 3;
  std::vector<std::string> inputs;
  std::string merged = "merged.csv";

  CLI::App* gen = app.add_subcommand("generate", "generate an expert demonstration dataset");
  bind_config(gen, cfg);
  gen->add_option("--episodes", episodes, "number of episodes");
  gen->add_option("--out", out, "output JSONL path");

  CLI::App* train = app.add_subcommand("train", "train a policy; writes metrics + checkpoint");
  bind_config(train, cfg);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint over seeded rollouts");
  bind_config(eval, cfg);

  CLI::App* ablate = app.add_subcommand("ablate-eta", "train/eval over a grid of eta values");
  bind_config(ablate, cfg);
  ablate->add_option("--grid", grid, "eta values")->delimiter(',');
  ablate->add_option("--trials", trials, "trials per eta");

  CLI::App* exp = app.add_subcommand("export-metrics", "merge metrics CSVs for plotting");
  exp->add_option("--inputs", inputs, "metrics CSV files")->delimiter(',')->required();
  exp->add_option("--out", merged, "merged CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(cfg, episodes, out);
    if (train->parsed()) return cmd_train(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (ablate->parsed()) return cmd_ablate_eta(cfg, grid, trials);
    if (exp->parsed()) return cmd_export_metrics(inputs, merged);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
