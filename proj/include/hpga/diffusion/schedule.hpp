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

#ifndef HPGA_DIFFUSION_SCHEDULE_HPP_
#define HPGA_DIFFUSION_SCHEDULE_HPP_

#include <cmath>
#include <string>
#include <vector>

namespace hpga::diffusion {

enum class ScheduleKind { kCosine, kLinearBeta };

ScheduleKind schedule_from_string(const std::string& s);
std::string schedule_to_string(ScheduleKind k);

// Cumulative signal retention per denoising step: alpha_bar[0] = 1,
// strictly decreasing, alpha_bar[k_max] < 0.05. Construction enforces the
// invariants and throws std::invalid_argument on violation.
class NoiseSchedule {
 public:
  NoiseSchedule(int k_max, std::vector<double> alpha_bar);

  int k_max() const { return k_max_; }
  double alpha_bar(int k) const { return alpha_bar_[static_cast<size_t>(k)]; }
  // Per-step retention alpha_k = alpha_bar_k / alpha_bar_{k-1}, k in 1..k_max.
  double alpha(int k) const { return alpha_bar_[static_cast<size_t>(k)] / alpha_bar_[static_cast<size_t>(k - 1)]; }
  double beta(int k) const { return 1.0 - alpha(k); }
  // Standard posterior standard deviation for the ancestral sampler.
  double posterior_sigma(int k) const {
    double ab = alpha_bar(k), abp = alpha_bar(k - 1);
    return std::sqrt((1.0 - abp) / (1.0 - ab) * beta(k));
  }

 private:
  int k_max_;
  std::vector<double> alpha_bar_;
};

// kCosine: squared-cosine retention with the usual small offset and per-step
// beta clipped to 0.999. kLinearBeta: betas linear in k, scaled by 1000/k_max
// so short schedules still decay to near-zero retention.
NoiseSchedule make_schedule(int k_max, ScheduleKind kind);

}  // namespace hpga::diffusion

#endif  // HPGA_DIFFUSION_SCHEDULE_HPP_
