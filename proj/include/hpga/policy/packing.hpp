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

#ifndef HPGA_POLICY_PACKING_HPP_
#define HPGA_POLICY_PACKING_HPP_

#include <span>

#include "hpga/ad/tensor.hpp"
#include "hpga/policy/frames.hpp"

// Conversion between environment frames and model inputs. The multivector
// packing lays out each observation frame as channels
//   [point(ee), quat(ee), scalar(gripper), point(obj_1), quat(obj_1), ...]
// so K_o = 3 + 2J; action frames pack as [point, quat, scalar], K_a = 3.
// The raw packing used by the baselines concatenates the same quantities as
// plain floats: per frame 8 + 7J observation features and 8 action features.

namespace hpga::policy {

inline constexpr int kActionChannels = 3;
inline constexpr int kActionRawDim = 8;

inline int observation_channels(int j_objects) { return 3 + 2 * j_objects; }
inline int observation_raw_dim(int j_objects) { return 8 + 7 * j_objects; }

// history.size() must equal the configured observation horizon; all frames
// must carry j_objects object poses and unit quaternions.
ad::Tensor pack_observation(std::span<const ObservationFrame> history, int j_objects);
ad::Tensor pack_actions(std::span<const ActionFrame> actions);
// Inverse of pack_actions: point/quaternion extraction with gripper clamped
// to [0,1]; propagates pga extraction errors for degenerate channels.
std::vector<ActionFrame> unpack_actions(const ad::Tensor& x_a);

ad::Tensor pack_observation_raw(std::span<const ObservationFrame> history, int j_objects);
ad::Tensor pack_actions_raw(std::span<const ActionFrame> actions);
std::vector<ActionFrame> unpack_actions_raw(const ad::Tensor& a);

}  // namespace hpga::policy

#endif  // HPGA_POLICY_PACKING_HPP_
