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

#ifndef HPGA_ENV_TASKS_HPP_
#define HPGA_ENV_TASKS_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "hpga/policy/frames.hpp"

// Deterministic kinematic manipulation environments: a free-flying
// end-effector with a displacement-capped position controller, a capped
// orientation slew, a binary-threshold gripper, and rigid attachment. No
// contact dynamics; step(state, action) is a pure function.

namespace hpga::env {

struct TaskSpec {
  std::string name = "point_reach";
  double eps_p = 0.02;        // position success tolerance (m)
  double eps_q = 0.2;         // orientation success tolerance (rad)
  double lift_h = 0.10;       // lift success height (m)
  double grasp_radius = 0.03; // attachment distance (m)
  double step_cap = 0.02;     // max ee displacement per step (m)
  double rot_cap = 0.2;       // max ee rotation per step (rad)
  int max_steps = 200;
  int j_objects = 1;
  std::array<double, 3> bounds_lo = {-0.25, -0.25, 0.02};
  std::array<double, 3> bounds_hi = {0.25, 0.25, 0.38};

  static TaskSpec point_reach();
  static TaskSpec lift_toy();
  static TaskSpec by_name(const std::string& name);
};

struct EnvState {
  policy::Pose ee;
  double gripper = 1.0;
  policy::Pose object;  // cube for lift_toy, target marker for point_reach
  policy::Pose target;  // goal pose (point_reach)
  int step = 0;
  bool attached = false;
  policy::Pose attach_offset;  // object pose expressed in the ee frame
};

// Randomized initial poses inside the workspace bounds, deterministic in seed.
EnvState env_reset(const TaskSpec& spec, uint64_t seed);

EnvState env_step(const EnvState& state, const policy::ActionFrame& a, const TaskSpec& spec);

// point_reach: strict position and geodesic-angle tolerances; lift_toy:
// object height strictly above lift_h.
bool check_success(const EnvState& state, const TaskSpec& spec);

// Builds the observation frame the policy sees (J = 1 object per task).
policy::ObservationFrame observe(const EnvState& state, const TaskSpec& spec);

}  // namespace hpga::env

#endif  // HPGA_ENV_TASKS_HPP_
