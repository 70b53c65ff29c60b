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

#include "hpga/env/expert.hpp"

#include <algorithm>
#include <cmath>

namespace hpga::env {

using pga::UnitQuaternion;
using policy::ActionFrame;

namespace {

double dist3(const pga::Point& a, const pga::Point& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

pga::Point step_toward(const pga::Point& from, const pga::Point& to, double cap) {
  double dx = to.x - from.x, dy = to.y - from.y, dz = to.z - from.z;
  double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (d <= cap) return to;
  double f = cap / d;
  return {from.x + f * dx, from.y + f * dy, from.z + f * dz};
}

UnitQuaternion slew_toward(const UnitQuaternion& from, const UnitQuaternion& to, double cap) {
  double ang = pga::quat_angle(from, to);
  if (ang <= cap) return to.canonical();
  return pga::quat_slerp(from, to, cap / ang).canonical();
}

}  // namespace

ActionFrame scripted_expert(const EnvState& state, const TaskSpec& spec) {
  ActionFrame a;
  // waypoints stay inside the per-step caps so recorded actions trace the
  // actual path instead of jumping to the goal
  double pos_step = 0.9 * spec.step_cap;
  double rot_step = 0.9 * spec.rot_cap;

  if (spec.name == "point_reach") {
    a.p = step_toward(state.ee.p, state.target.p, pos_step);
    a.q = slew_toward(state.ee.q, state.target.q, rot_step);
    a.gripper = 1.0;
    return a;
  }

  // lift_toy
  a.q = state.ee.q.canonical();
  if (state.attached) {
    pga::Point lift_goal{state.object.p.x, state.object.p.y, spec.lift_h + 0.06};
    a.p = step_toward(state.ee.p, lift_goal, pos_step);
    a.gripper = 0.0;
    return a;
  }
  double d = dist3(state.ee.p, state.object.p);
  if (d < 0.8 * spec.grasp_radius) {
    a.p = state.ee.p;  // hold and close
    a.gripper = 0.0;
  } else {
    a.p = step_toward(state.ee.p, state.object.p, pos_step);
    a.gripper = 1.0;
  }
  return a;
}

}  // namespace hpga::env
