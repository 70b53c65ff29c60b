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

#include "hpga/policy/rollout.hpp"

#include <stdexcept>

namespace hpga::policy {

RolloutResult rollout(const PlanFn& plan, const env::TaskSpec& spec, uint64_t env_seed,
                      int max_steps, int h_o, int h_a) {
  RolloutResult res;
  res.trace.task = spec.name;
  res.trace.seed = env_seed;

  env::EnvState st = env::env_reset(spec, env_seed);
  std::vector<ObservationFrame> history(static_cast<size_t>(h_o), env::observe(st, spec));

  while (res.steps < max_steps) {
    std::vector<ActionFrame> actions = plan(history);
    if (static_cast<int>(actions.size()) < h_a) {
      throw std::invalid_argument("rollout: plan returned fewer than h_a actions");
    }
    for (int i = 0; i < h_a && res.steps < max_steps; ++i) {
      const ActionFrame& a = actions[static_cast<size_t>(i)];
      res.trace.obs.push_back(history.back());
      res.trace.act.push_back(a);
      st = env::env_step(st, a, spec);
      ++res.steps;
      history.erase(history.begin());
      history.push_back(env::observe(st, spec));
      if (env::check_success(st, spec)) {
        res.success = true;
        res.trace.success = true;
        return res;
      }
    }
  }
  return res;
}

}  // namespace hpga::policy
