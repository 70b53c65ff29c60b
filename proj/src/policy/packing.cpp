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

#include "hpga/policy/packing.hpp"

#include <algorithm>
#include <stdexcept>

namespace hpga::policy {

using ad::Tensor;
using namespace hpga::pga;

namespace {

void write_mv(Tensor& t, int frame, int channel, const Multivector& m) {
  for (int i = 0; i < 16; ++i) t.at(frame, channel, i) = m[i];
}

Multivector read_mv(const Tensor& t, int frame, int channel) {
  Multivector m;
  for (int i = 0; i < 16; ++i) m[i] = t.at(frame, channel, i);
  return m;
}

}  // namespace

Tensor pack_observation(std::span<const ObservationFrame> history, int j_objects) {
  int h = static_cast<int>(history.size());
  if (h < 1) throw std::invalid_argument("pack_observation: empty history");
  int k_o = observation_channels(j_objects);
  Tensor out({h, k_o, 16});
  for (int f = 0; f < h; ++f) {
    const ObservationFrame& o = history[static_cast<size_t>(f)];
    if (static_cast<int>(o.objects.size()) != j_objects) {
      throw std::invalid_argument("pack_observation: object count mismatch");
    }
    write_mv(out, f, 0, embed(o.ee.p));
    write_mv(out, f, 1, embed(o.ee.q));
    write_mv(out, f, 2, embed(Scalar{o.gripper}));
    for (int j = 0; j < j_objects; ++j) {
      write_mv(out, f, 3 + 2 * j, embed(o.objects[static_cast<size_t>(j)].p));
      write_mv(out, f, 4 + 2 * j, embed(o.objects[static_cast<size_t>(j)].q));
    }
  }
  return out;
}

Tensor pack_actions(std::span<const ActionFrame> actions) {
  int h = static_cast<int>(actions.size());
  if (h < 1) throw std::invalid_argument("pack_actions: empty sequence");
  Tensor out({h, kActionChannels, 16});
  for (int f = 0; f < h; ++f) {
    const ActionFrame& a = actions[static_cast<size_t>(f)];
    write_mv(out, f, 0, embed(a.p));
    write_mv(out, f, 1, embed(a.q));
    write_mv(out, f, 2, embed(Scalar{a.gripper}));
  }
  return out;
}

std::vector<ActionFrame> unpack_actions(const Tensor& x_a) {
  const auto& s = x_a.shape();
  if (s.size() != 3 || s[1] != kActionChannels || s[2] != 16) {
    throw std::invalid_argument("unpack_actions: expected (H, 3, 16)");
  }
  std::vector<ActionFrame> out(static_cast<size_t>(s[0]));
  for (int f = 0; f < s[0]; ++f) {
    ActionFrame& a = out[static_cast<size_t>(f)];
    a.p = extract<Point>(read_mv(x_a, f, 0));
    a.q = extract<UnitQuaternion>(read_mv(x_a, f, 1));
    a.gripper = std::clamp(extract<Scalar>(read_mv(x_a, f, 2)).value, 0.0, 1.0);
  }
  return out;
}

Tensor pack_observation_raw(std::span<const ObservationFrame> history, int j_objects) {
  int h = static_cast<int>(history.size());
  if (h < 1) throw std::invalid_argument("pack_observation_raw: empty history");
  int dim = observation_raw_dim(j_objects);
  Tensor out({h, dim});
  for (int f = 0; f < h; ++f) {
    const ObservationFrame& o = history[static_cast<size_t>(f)];
    if (static_cast<int>(o.objects.size()) != j_objects) {
      throw std::invalid_argument("pack_observation_raw: object count mismatch");
    }
    int i = 0;
    out.at(f, i++) = o.ee.p.x;
    out.at(f, i++) = o.ee.p.y;
    out.at(f, i++) = o.ee.p.z;
    out.at(f, i++) = o.ee.q.w;
    out.at(f, i++) = o.ee.q.x;
    out.at(f, i++) = o.ee.q.y;
    out.at(f, i++) = o.ee.q.z;
    out.at(f, i++) = o.gripper;
    for (const Pose& obj : o.objects) {
      out.at(f, i++) = obj.p.x;
      out.at(f, i++) = obj.p.y;
      out.at(f, i++) = obj.p.z;
      out.at(f, i++) = obj.q.w;
      out.at(f, i++) = obj.q.x;
      out.at(f, i++) = obj.q.y;
      out.at(f, i++) = obj.q.z;
    }
  }
  return out;
}

Tensor pack_actions_raw(std::span<const ActionFrame> actions) {
  int h = static_cast<int>(actions.size());
  if (h < 1) throw std::invalid_argument("pack_actions_raw: empty sequence");
  Tensor out({h, kActionRawDim});
  for (int f = 0; f < h; ++f) {
    const ActionFrame& a = actions[static_cast<size_t>(f)];
    out.at(f, 0) = a.p.x;
    out.at(f, 1) = a.p.y;
    out.at(f, 2) = a.p.z;
    out.at(f, 3) = a.q.w;
    out.at(f, 4) = a.q.x;
    out.at(f, 5) = a.q.y;
    out.at(f, 6) = a.q.z;
    out.at(f, 7) = a.gripper;
  }
  return out;
}

std::vector<ActionFrame> unpack_actions_raw(const Tensor& t) {
  const auto& s = t.shape();
  if (s.size() != 2 || s[1] != kActionRawDim) {
    throw std::invalid_argument("unpack_actions_raw: expected (H, 8)");
  }
  std::vector<ActionFrame> out(static_cast<size_t>(s[0]));
  for (int f = 0; f < s[0]; ++f) {
    ActionFrame& a = out[static_cast<size_t>(f)];
    a.p = {t.at(f, 0), t.at(f, 1), t.at(f, 2)};
    UnitQuaternion q{t.at(f, 3), t.at(f, 4), t.at(f, 5), t.at(f, 6)};
    if (q.norm() < 1e-9) throw std::domain_error("unpack_actions_raw: degenerate orientation");
    a.q = q.normalized();
    a.gripper = std::clamp(t.at(f, 7), 0.0, 1.0);
  }
  return out;
}

}  // namespace hpga::policy
