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

#ifndef HPGA_POLICY_FRAMES_HPP_
#define HPGA_POLICY_FRAMES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hpga/pga/entities.hpp"

namespace hpga::policy {

struct Pose {
  pga::Point p;
  pga::UnitQuaternion q;
};

// Robot state (end-effector pose + gripper opening in [0,1]) plus the poses
// of the task-relevant objects.
struct ObservationFrame {
  Pose ee;
  double gripper = 1.0;
  std::vector<Pose> objects;
};

struct ActionFrame {
  pga::Point p;
  pga::UnitQuaternion q;
  double gripper = 1.0;
};

struct Episode {
  std::string task;
  uint64_t seed = 0;
  bool success = false;
  std::vector<ObservationFrame> obs;
  std::vector<ActionFrame> act;  // same length as obs
};

}  // namespace hpga::policy

#endif  // HPGA_POLICY_FRAMES_HPP_
