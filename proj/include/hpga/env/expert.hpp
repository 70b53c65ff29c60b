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

#ifndef HPGA_ENV_EXPERT_HPP_
#define HPGA_ENV_EXPERT_HPP_

#include "hpga/env/tasks.hpp"

namespace hpga::env {

// Scripted demonstrator: capped linear interpolation of position, spherical
// interpolation of orientation, staged gripper schedule
// (approach -> grasp -> lift for lift_toy; constant-open reach otherwise).
policy::ActionFrame scripted_expert(const EnvState& state, const TaskSpec& spec);

}  // namespace hpga::env

#endif  // HPGA_ENV_EXPERT_HPP_
