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

#ifndef HPGA_AD_ADAM_HPP_
#define HPGA_AD_ADAM_HPP_

#include <vector>

#include "hpga/ad/params.hpp"

namespace hpga::ad {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;
};

// Adam with decoupled weight decay.
class AdamW {
 public:
  using Options = AdamOptions;

  AdamW(const ModelParams& params, Options opt = Options());

  // Applies one update from the gradients currently in the store, then leaves
  // them untouched (callers zero them when starting the next accumulation).
  void step(ModelParams& params);

  void set_lr(double lr) { opt_.lr = lr; }
  const Options& options() const { return opt_; }

 private:
  Options opt_;
  int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;  // per group
};

}  // namespace hpga::ad

#endif  // HPGA_AD_ADAM_HPP_
