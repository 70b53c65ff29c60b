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

#include "hpga/env/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hpga/ad/rng.hpp"

namespace hpga::env {

using pga::UnitQuaternion;
using policy::ActionFrame;
using policy::ObservationFrame;
using policy::Pose;

namespace {

double dist3(const pga::Point& a, const pga::Point& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

pga::Point random_point(Rng& rng, const TaskSpec& s) {
  return {rng.uniform(s.bounds_lo[0], s.bounds_hi[0]),
          rng.uniform(s.bounds_lo[1], s.bounds_hi[1]),
          rng.uniform(s.bounds_lo[2], s.bounds_hi[2])};
}

UnitQuaternion random_orientation(Rng& rng) {
  UnitQuaternion q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
  return q.normalized().canonical();
}

// object pose expressed in the ee frame
Pose relative_pose(const Pose& ee, const Pose& obj) {
  UnitQuaternion inv = ee.q.conjugate();
  double dx = obj.p.x - ee.p.x, dy = obj.p.y - ee.p.y, dz = obj.p.z - ee.p.z;
  double rx, ry, rz;
  pga::quat_rotate(inv, dx, dy, dz, &rx, &ry, &rz);
  return {{rx, ry, rz}, pga::quat_multiply(inv, obj.q).canonical()};
}

Pose compose_pose(const Pose& ee, const Pose& rel) {
  double rx, ry, rz;
  pga::quat_rotate(ee.q, rel.p.x, rel.p.y, rel.p.z, &rx, &ry, &rz);
  return {{ee.p.x + rx, ee.p.y + ry, ee.p.z + rz},
          pga::quat_multiply(ee.q, rel.q).canonical()};
}

}  // namespace

TaskSpec TaskSpec::point_reach() {
  TaskSpec s;
  s.name = "point_reach";
  return s;
}

TaskSpec TaskSpec::lift_toy() {
  TaskSpec s;
  s.name = "lift_toy";
  return s;
}

TaskSpec TaskSpec::by_name(const std::string& name) {
  if (name == "point_reach") return point_reach();
  if (name == "lift_toy") return lift_toy();
  throw std::invalid_argument("unknown task: " + name);
}

EnvState env_reset(const TaskSpec& spec, uint64_t seed) {
  Rng rng(seed);
  EnvState st;
  st.ee.p = random_point(rng, spec);
  st.ee.q = random_orientation(rng);
  st.gripper = 1.0;
  if (spec.name == "point_reach") {
    // resample until the goal is meaningfully far from the start
    do {
      st.target.p = random_point(rng, spec);
      st.target.q = random_orientation(rng);
    } while (dist3(st.target.p, st.ee.p) < 0.12 ||
             pga::quat_angle(st.target.q, st.ee.q) < 0.5);
    st.object = st.target;  // the observed marker is the goal pose
  } else {
    do {
      st.object.p = random_point(rng, spec);
      st.object.p.z = 0.02;  // resting on the table plane
    } while (dist3(st.object.p, st.ee.p) < 0.08);
    st.object.q = UnitQuaternion::from_axis_angle(0, 0, 1, rng.uniform(-M_PI, M_PI)).canonical();
    st.target = st.object;
  }
  return st;
}

EnvState env_step(const EnvState& state, const ActionFrame& a, const TaskSpec& spec) {
  EnvState st = state;

  // position: move toward the commanded point, displacement capped
  double dx = a.p.x - st.ee.p.x, dy = a.p.y - st.ee.p.y, dz = a.p.z - st.ee.p.z;
  double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (d > spec.step_cap) {
    double f = spec.step_cap / d;
    dx *= f;
    dy *= f;
    dz *= f;
  }
  st.ee.p.x += dx;
  st.ee.p.y += dy;
  st.ee.p.z += dz;

  // orientation: slew toward the commanded orientation, rotation capped
  double ang = pga::quat_angle(st.ee.q, a.q);
  if (ang > spec.rot_cap) {
    st.ee.q = pga::quat_slerp(st.ee.q, a.q, spec.rot_cap / ang).canonical();
  } else {
    st.ee.q = a.q.canonical();
  }

  st.gripper = std::clamp(a.gripper, 0.0, 1.0);

  if (st.attached && st.gripper >= 0.5) st.attached = false;
  if (!st.attached && st.gripper < 0.5 &&
      dist3(st.object.p, st.ee.p) < spec.grasp_radius) {
    st.attached = true;
    st.attach_offset = relative_pose(st.ee, st.object);
  }
  if (st.attached) st.object = compose_pose(st.ee, st.attach_offset);

  st.step = state.step + 1;
  return st;
}

bool check_success(const EnvState& state, const TaskSpec& spec) {
  if (spec.name == "point_reach") {
    return dist3(state.ee.p, state.target.p) < spec.eps_p &&
           pga::quat_angle(state.ee.q, state.target.q) < spec.eps_q;
  }
  return state.object.p.z > spec.lift_h;
}

ObservationFrame observe(const EnvState& state, const TaskSpec& spec) {
  (void)spec;
  ObservationFrame o;
  o.ee.p = state.ee.p;
  o.ee.q = state.ee.q.canonical();
  o.gripper = state.gripper;
  o.objects.push_back({state.object.p, state.object.q.canonical()});
  return o;
}

}  // namespace hpga::env
