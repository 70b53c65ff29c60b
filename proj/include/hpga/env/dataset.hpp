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

#ifndef HPGA_ENV_DATASET_HPP_
#define HPGA_ENV_DATASET_HPP_

#include <string>
#include <vector>

#include "hpga/env/tasks.hpp"

// Demonstration dataset on disk: JSON Lines, UTF-8. The first record is a
// header {"schema": 1, "task": ..., "seed": ..., "episodes": n}; every
// following line is one episode with equal-length obs[]/act[] arrays, a
// success flag, and its reset seed.

namespace hpga::env {

struct Dataset {
  int schema = 1;
  std::string task;
  uint64_t seed = 0;
  std::vector<policy::Episode> episodes;
};

// Runs the scripted expert for one seeded reset, holding at the goal so
// every episode is long enough for a full training window.
policy::Episode run_expert_episode(const TaskSpec& spec, uint64_t seed, int min_length);

// Writes n expert episodes; regeneration with the same arguments is
// byte-identical. Throws std::runtime_error on I/O failure or if an episode
// fails (the scripted expert is expected to succeed on every seed).
void generate_dataset(const TaskSpec& spec, int n_episodes, uint64_t seed,
                      const std::string& out_path, int min_length = 24);

Dataset load_dataset(const std::string& path);

// Replays the stored actions open-loop from the episode's reset seed and
// reports whether the final state satisfies the task's success predicate.
bool replay_episode(const policy::Episode& ep, const TaskSpec& spec);

}  // namespace hpga::env

#endif  // HPGA_ENV_DATASET_HPP_
