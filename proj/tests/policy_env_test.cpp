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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hpga/env/dataset.hpp"
#include "hpga/env/expert.hpp"
#include "hpga/policy/packing.hpp"
#include "hpga/policy/rollout.hpp"
#include "oracles.hpp"

using namespace hpga;
using namespace hpga::policy;
using namespace hpga::env;
using ad::Tensor;

namespace {

ObservationFrame random_obs(Rng& rng, int j) {
  ObservationFrame o;
  o.ee.p = {rng.normal(), rng.normal(), rng.normal()};
  o.ee.q = hpga::testing::random_quaternion(rng);
  o.gripper = rng.uniform();
  for (int i = 0; i < j; ++i) {
    o.objects.push_back({{rng.normal(), rng.normal(), rng.normal()},
                         hpga::testing::random_quaternion(rng)});
  }
  return o;
}

ActionFrame random_action(Rng& rng) {
  ActionFrame a;
  a.p = {rng.normal(), rng.normal(), rng.normal()};
  a.q = hpga::testing::random_quaternion(rng);
  a.gripper = rng.uniform();
  return a;
}

double dist3(const pga::Point& a, const pga::Point& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::string file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("pack_observation: channel schema and identity frame") {
  CHECK(observation_channels(2) == 7);
  ObservationFrame o;
  o.ee.p = {0, 0, 0};
  o.ee.q = pga::UnitQuaternion::identity();
  o.gripper = 0.0;
  o.objects.push_back({{0, 0, 0}, pga::UnitQuaternion::identity()});
  std::vector<ObservationFrame> hist = {o, o};
  Tensor t = pack_observation(hist, 1);
  CHECK(t.shape() == std::vector<int>{2, 5, 16});
  // ee point channel at the origin: pure e123
  CHECK(t.at(0, 0, pga::kE123) == 1.0);
  for (int m = 0; m < 16; ++m) {
    if (m != pga::kE123) CHECK(t.at(0, 0, m) == 0.0);
  }
  // identity orientation: pure scalar
  CHECK(t.at(0, 1, pga::kS) == 1.0);
  // zero gripper: all-zero channel
  for (int m = 0; m < 16; ++m) CHECK(t.at(0, 2, m) == 0.0);
}

TEST_CASE("pack/unpack roundtrips within 1e-9") {
  Rng rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ObservationFrame> hist = {random_obs(rng, 2), random_obs(rng, 2)};
    Tensor obs = pack_observation(hist, 2);
    // read back every channel and compare
    for (int f = 0; f < 2; ++f) {
      pga::Multivector mp;
      for (int m = 0; m < 16; ++m) mp[m] = obs.at(f, 0, m);
      pga::Point p = pga::extract<pga::Point>(mp);
      CHECK(std::abs(p.x - hist[static_cast<size_t>(f)].ee.p.x) <= 1e-12);
      pga::Multivector mq;
      for (int m = 0; m < 16; ++m) mq[m] = obs.at(f, 1, m);
      pga::UnitQuaternion q = pga::extract<pga::UnitQuaternion>(mq);
      CHECK(std::abs(q.w - hist[static_cast<size_t>(f)].ee.q.w) <= 1e-12);
    }

    std::vector<ActionFrame> acts;
    for (int i = 0; i < 4; ++i) acts.push_back(random_action(rng));
    std::vector<ActionFrame> back = unpack_actions(pack_actions(acts));
    REQUIRE(back.size() == acts.size());
    for (size_t i = 0; i < acts.size(); ++i) {
      CHECK(std::abs(back[i].p.x - acts[i].p.x) <= 1e-9);
      CHECK(std::abs(back[i].p.y - acts[i].p.y) <= 1e-9);
      CHECK(std::abs(back[i].p.z - acts[i].p.z) <= 1e-9);
      CHECK(std::abs(back[i].q.w - acts[i].q.w) <= 1e-9);
      CHECK(std::abs(back[i].q.x - acts[i].q.x) <= 1e-9);
      CHECK(std::abs(back[i].gripper - acts[i].gripper) <= 1e-9);
    }

    // raw packing roundtrip
    std::vector<ActionFrame> back_raw = unpack_actions_raw(pack_actions_raw(acts));
    for (size_t i = 0; i < acts.size(); ++i) {
      CHECK(std::abs(back_raw[i].p.x - acts[i].p.x) <= 1e-12);
      CHECK(std::abs(back_raw[i].q.z - acts[i].q.z) <= 1e-12);
    }
  }
}

TEST_CASE("unpack_actions: homogeneous orientation scaling and gripper clamp") {
  Rng rng(92);
  std::vector<ActionFrame> acts = {random_action(rng)};
  Tensor x = pack_actions(acts);
  // scale the orientation channel: same unit quaternion after extraction
  for (int m = 0; m < 16; ++m) x.at(0, 1, m) *= 2.0;
  // push the gripper channel out of range: clamped to 1
  x.at(0, 2, pga::kS) = 1.3;
  std::vector<ActionFrame> back = unpack_actions(x);
  CHECK(std::abs(back[0].q.w - acts[0].q.w) <= 1e-12);
  CHECK(std::abs(back[0].q.x - acts[0].q.x) <= 1e-12);
  CHECK(back[0].gripper == 1.0);
}

TEST_CASE("env_reset: seeded determinism, bounds, distinct seeds") {
  TaskSpec spec = TaskSpec::point_reach();
  EnvState a = env_reset(spec, 4242);
  EnvState b = env_reset(spec, 4242);
  CHECK(a.ee.p.x == b.ee.p.x);
  CHECK(a.target.q.w == b.target.q.w);

  int collisions = 0;
  pga::Point prev{1e9, 1e9, 1e9};
  for (int i = 0; i < 1000; ++i) {
    EnvState st = env_reset(spec, static_cast<uint64_t>(i));
    for (int d = 0; d < 3; ++d) {
      double v = d == 0 ? st.ee.p.x : (d == 1 ? st.ee.p.y : st.ee.p.z);
      CHECK(v >= spec.bounds_lo[static_cast<size_t>(d)]);
      CHECK(v <= spec.bounds_hi[static_cast<size_t>(d)]);
      double o = d == 0 ? st.object.p.x : (d == 1 ? st.object.p.y : st.object.p.z);
      CHECK(o >= spec.bounds_lo[static_cast<size_t>(d)]);
      CHECK(o <= spec.bounds_hi[static_cast<size_t>(d)]);
    }
    if (dist3(st.object.p, prev) < 1e-6) ++collisions;
    prev = st.object.p;
  }
  CHECK(collisions < 10);
}

TEST_CASE("env_step: fixed point, displacement cap, rigid attachment") {
  TaskSpec spec = TaskSpec::lift_toy();
  EnvState st = env_reset(spec, 7);

  // commanding the current pose leaves the state unchanged
  ActionFrame hold;
  hold.p = st.ee.p;
  hold.q = st.ee.q;
  hold.gripper = st.gripper;
  EnvState same = env_step(st, hold, spec);
  CHECK(same.ee.p.x == st.ee.p.x);
  CHECK(same.ee.p.y == st.ee.p.y);
  CHECK(same.ee.p.z == st.ee.p.z);

  // adversarially distant commands move at most step_cap
  ActionFrame far = hold;
  far.p = {99.0, -99.0, 99.0};
  EnvState moved = env_step(st, far, spec);
  CHECK(dist3(moved.ee.p, st.ee.p) <= spec.step_cap + 1e-12);

  // attach, then lift by h: the object follows exactly
  EnvState at = st;
  at.ee.p = at.object.p;
  ActionFrame close = hold;
  close.p = at.ee.p;
  close.gripper = 0.0;
  at = env_step(at, close, spec);
  CHECK(at.attached);
  double before = at.object.p.z;
  for (int i = 0; i < 10; ++i) {
    ActionFrame up = close;
    up.p = {at.ee.p.x, at.ee.p.y, at.ee.p.z + spec.step_cap};
    at = env_step(at, up, spec);
  }
  CHECK(at.object.p.z == doctest::Approx(before + 10 * spec.step_cap).epsilon(1e-9));
}

TEST_CASE("check_success: exact pose, strict boundary") {
  TaskSpec spec = TaskSpec::point_reach();
  EnvState st = env_reset(spec, 3);
  st.ee.p = st.target.p;
  st.ee.q = st.target.q;
  CHECK(check_success(st, spec));

  st.ee.p.x = st.target.p.x + 2 * spec.eps_p;
  CHECK(!check_success(st, spec));

  // boundary: a power-of-two tolerance keeps sqrt(dx^2) exact, so the
  // distance equals eps_p bitwise and the strict inequality must reject it
  TaskSpec exact = spec;
  exact.eps_p = 0.03125;
  st.ee.p = st.target.p;
  st.ee.q = st.target.q;
  st.ee.p.x += exact.eps_p;
  CHECK(!check_success(st, exact));
  st.ee.p.x = st.target.p.x + 0.99 * exact.eps_p;
  CHECK(check_success(st, exact));
}

TEST_CASE("scripted expert solves both tasks on every seed") {
  for (const char* name : {"point_reach", "lift_toy"}) {
    TaskSpec spec = TaskSpec::by_name(name);
    for (uint64_t seed = 0; seed < 100; ++seed) {
      EnvState st = env_reset(spec, seed);
      bool ok = false;
      while (st.step < spec.max_steps) {
        ActionFrame a = scripted_expert(st, spec);
        CHECK(std::abs(a.q.norm() - 1.0) <= 1e-9);
        st = env_step(st, a, spec);
        if (check_success(st, spec)) {
          ok = true;
          break;
        }
      }
      INFO("task ", name, " seed ", seed);
      REQUIRE(ok);
    }
  }
}

TEST_CASE("dataset: generation, replay, canonical quaternions, byte-identical regen") {
  TaskSpec spec = TaskSpec::point_reach();
  std::string p1 = "/tmp/hpga_ds_a.jsonl";
  std::string p2 = "/tmp/hpga_ds_b.jsonl";
  generate_dataset(spec, 12, 2024, p1);
  generate_dataset(spec, 12, 2024, p2);
  CHECK(file_bytes(p1) == file_bytes(p2));

  Dataset ds = load_dataset(p1);
  CHECK(ds.task == "point_reach");
  CHECK(static_cast<int>(ds.episodes.size()) == 12);
  for (const Episode& ep : ds.episodes) {
    CHECK(ep.success);
    CHECK(ep.obs.size() == ep.act.size());
    CHECK(static_cast<int>(ep.obs.size()) >= 18);  // >= h_o + h_p at defaults
    CHECK(replay_episode(ep, spec));
    for (const ObservationFrame& o : ep.obs) {
      CHECK(o.ee.q.w >= 0.0);
      for (const Pose& obj : o.objects) CHECK(obj.q.w >= 0.0);
    }
  }
  std::remove(p1.c_str());
  std::remove(p2.c_str());

  // lift task datasets replay too
  TaskSpec lift = TaskSpec::lift_toy();
  std::string p3 = "/tmp/hpga_ds_c.jsonl";
  generate_dataset(lift, 6, 11, p3);
  Dataset dl = load_dataset(p3);
  for (const Episode& ep : dl.episodes) CHECK(replay_episode(ep, lift));
  std::remove(p3.c_str());
}

TEST_CASE("rollout: scripted expert as policy succeeds; trace bounded") {
  TaskSpec spec = TaskSpec::point_reach();
  // the expert wrapped as a receding-horizon planner: plan h_p one-step
  // expert actions by simulating forward from the latest observation
  PlanFn expert_plan = [&](const std::vector<ObservationFrame>& history) {
    EnvState sim;
    sim.ee.p = history.back().ee.p;
    sim.ee.q = history.back().ee.q;
    sim.gripper = history.back().gripper;
    sim.object = {history.back().objects[0].p, history.back().objects[0].q};
    sim.target = sim.object;
    std::vector<ActionFrame> plan;
    for (int i = 0; i < 16; ++i) {
      ActionFrame a = scripted_expert(sim, spec);
      plan.push_back(a);
      sim = env_step(sim, a, spec);
    }
    return plan;
  };
  for (uint64_t seed = 0; seed < 10; ++seed) {
    RolloutResult r = rollout(expert_plan, spec, seed, spec.max_steps, 2, 8);
    CHECK(r.success);
    CHECK(r.steps <= spec.max_steps);
    CHECK(static_cast<int>(r.trace.obs.size()) == r.steps);
  }

  // a policy emitting a fixed far-away pose never succeeds
  PlanFn stuck_plan = [&](const std::vector<ObservationFrame>&) {
    std::vector<ActionFrame> plan(16);
    for (ActionFrame& a : plan) {
      a.p = {0.24, 0.24, 0.37};
      a.q = pga::UnitQuaternion::identity();
      a.gripper = 1.0;
    }
    return plan;
  };
  int successes = 0;
  for (uint64_t seed = 100; seed < 120; ++seed) {
    RolloutResult r = rollout(stuck_plan, spec, seed, spec.max_steps, 2, 8);
    successes += r.success ? 1 : 0;
    CHECK(r.steps <= spec.max_steps);
  }
  CHECK(successes <= 1);
}
