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

#include "hpga/env/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include "hpga/ad/rng.hpp"
#include "hpga/env/expert.hpp"
#include "json.hpp"

namespace hpga::env {

using json = nlohmann::ordered_json;
using policy::ActionFrame;
using policy::Episode;
using policy::ObservationFrame;
using policy::Pose;

namespace {

json pose_json(const pga::Point& p, const pga::UnitQuaternion& q) {
  return json{{"p", {p.x, p.y, p.z}}, {"q", {q.w, q.x, q.y, q.z}}};
}

json episode_json(const Episode& ep) {
  json obs = json::array();
  for (const ObservationFrame& o : ep.obs) {
    json jo = json{{"p", {o.ee.p.x, o.ee.p.y, o.ee.p.z}},
                   {"q", {o.ee.q.w, o.ee.q.x, o.ee.q.y, o.ee.q.z}},
                   {"g", o.gripper}};
    json objs = json::array();
    for (const Pose& obj : o.objects) objs.push_back(pose_json(obj.p, obj.q));
    jo["objects"] = objs;
    obs.push_back(jo);
  }
  json act = json::array();
  for (const ActionFrame& a : ep.act) {
    act.push_back(json{{"p", {a.p.x, a.p.y, a.p.z}},
                       {"q", {a.q.w, a.q.x, a.q.y, a.q.z}},
                       {"g", a.gripper}});
  }
  return json{{"seed", ep.seed}, {"success", ep.success}, {"obs", obs}, {"act", act}};
}

Episode episode_from_json(const json& j, const std::string& task) {
  Episode ep;
  ep.task = task;
  ep.seed = j.at("seed").get<uint64_t>();
  ep.success = j.at("success").get<bool>();
  for (const json& jo : j.at("obs")) {
    ObservationFrame o;
    o.ee.p = {jo.at("p")[0], jo.at("p")[1], jo.at("p")[2]};
    o.ee.q = {jo.at("q")[0], jo.at("q")[1], jo.at("q")[2], jo.at("q")[3]};
    o.gripper = jo.at("g").get<double>();
    for (const json& jb : jo.at("objects")) {
      Pose obj;
      obj.p = {jb.at("p")[0], jb.at("p")[1], jb.at("p")[2]};
      obj.q = {jb.at("q")[0], jb.at("q")[1], jb.at("q")[2], jb.at("q")[3]};
      o.objects.push_back(obj);
    }
    ep.obs.push_back(std::move(o));
  }
  for (const json& ja : j.at("act")) {
    ActionFrame a;
    a.p = {ja.at("p")[0], ja.at("p")[1], ja.at("p")[2]};
    a.q = {ja.at("q")[0], ja.at("q")[1], ja.at("q")[2], ja.at("q")[3]};
    a.gripper = ja.at("g").get<double>();
    ep.act.push_back(a);
  }
  return ep;
}

}  // namespace

Episode run_expert_episode(const TaskSpec& spec, uint64_t seed, int min_length) {
  Episode ep;
  ep.task = spec.name;
  ep.seed = seed;
  EnvState st = env_reset(spec, seed);
  bool reached = false;
  while (st.step < spec.max_steps) {
    ObservationFrame o = observe(st, spec);
    ActionFrame a = scripted_expert(st, spec);
    ep.obs.push_back(o);
    ep.act.push_back(a);
    st = env_step(st, a, spec);
    reached = check_success(st, spec);
    // hold at the goal until the episode is long enough for training windows
    if (reached && static_cast<int>(ep.obs.size()) >= min_length) break;
  }
  ep.success = reached;
  return ep;
}

void generate_dataset(const TaskSpec& spec, int n_episodes, uint64_t seed,
                      const std::string& out_path, int min_length) {
  if (n_episodes < 1) throw std::invalid_argument("generate_dataset: n_episodes must be >= 1");
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("generate_dataset: cannot open " + out_path);
  json header{{"schema", 1}, {"task", spec.name}, {"seed", seed}, {"episodes", n_episodes}};
  os << header.dump() << "\n";
  Rng root(seed);
  for (int i = 0; i < n_episodes; ++i) {
    uint64_t ep_seed = root.fork(static_cast<uint64_t>(i)).next();
    Episode ep = run_expert_episode(spec, ep_seed, min_length);
    if (!ep.success) {
      throw std::runtime_error("generate_dataset: expert failed on episode " +
                               std::to_string(i));
    }
    os << episode_json(ep).dump() << "\n";
  }
  if (!os) throw std::runtime_error("generate_dataset: write failed for " + out_path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
  Dataset ds;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("load_dataset: empty file " + path);
  json header = json::parse(line);
  ds.schema = header.at("schema").get<int>();
  ds.task = header.at("task").get<std::string>();
  ds.seed = header.at("seed").get<uint64_t>();
  int n = header.at("episodes").get<int>();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ds.episodes.push_back(episode_from_json(json::parse(line), ds.task));
  }
  if (static_cast<int>(ds.episodes.size()) != n) {
    throw std::runtime_error("load_dataset: episode count mismatch in " + path);
  }
  return ds;
}

bool replay_episode(const Episode& ep, const TaskSpec& spec) {
  EnvState st = env_reset(spec, ep.seed);
  for (const ActionFrame& a : ep.act) st = env_step(st, a, spec);
  return check_success(st, spec);
}

}  // namespace hpga::env
