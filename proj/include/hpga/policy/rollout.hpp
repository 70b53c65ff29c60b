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

#ifndef HPGA_POLICY_ROLLOUT_HPP_
#define HPGA_POLICY_ROLLOUT_HPP_

#include <functional>

#include "hpga/env/tasks.hpp"
#include "hpga/policy/frames.hpp"

namespace hpga::policy {

// Produces a plan of H_p actions from the last H_o observations (oldest
// first).
using PlanFn =
    std::function<std::vector<ActionFrame>(const std::vector<ObservationFrame>&)>;

struct RolloutResult {
  bool success = false;
  int steps = 0;
  Episode trace;
};

// Receding-horizon execution: replan from the latest H_o observations,
// execute the first h_a actions of each plan, stop at success or max_steps.
// The observation history is padded by repeating the initial frame.
RolloutResult rollout(const PlanFn& plan, const env::TaskSpec& spec, uint64_t env_seed,
                      int max_steps, int h_o, int h_a);

}  // namespace hpga::policy

#endif  // HPGA_POLICY_ROLLOUT_HPP_
