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

#include "hpga/ad/adam.hpp"

#include <cmath>

namespace hpga::ad {

AdamW::AdamW(const ModelParams& params, Options opt) : opt_(opt) {
  for (int g = 0; g < params.num_groups(); ++g) {
    m_.emplace_back(params.group(g).values.size(), 0.0);
    v_.emplace_back(params.group(g).values.size(), 0.0);
  }
}

void AdamW::step(ModelParams& params) {
  ++t_;
  double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (int gi = 0; gi < params.num_groups(); ++gi) {
    auto& group = params.group(gi);
    auto& m = m_[static_cast<size_t>(gi)];
    auto& v = v_[static_cast<size_t>(gi)];
    for (size_t i = 0; i < group.values.size(); ++i) {
      double g = group.grads[i];
      m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g;
      v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g * g;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      group.values[i] -=
          opt_.lr * (mhat / (std::sqrt(vhat) + opt_.eps) + opt_.weight_decay * group.values[i]);
    }
  }
}

}  // namespace hpga::ad
