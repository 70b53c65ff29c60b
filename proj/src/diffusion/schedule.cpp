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

#include "hpga/diffusion/schedule.hpp"

#include <algorithm>
#include <stdexcept>

namespace hpga::diffusion {

ScheduleKind schedule_from_string(const std::string& s) {
  if (s == "cosine") return ScheduleKind::kCosine;
  if (s == "linear_beta") return ScheduleKind::kLinearBeta;
  throw std::invalid_argument("unknown schedule kind: " + s);
}

std::string schedule_to_string(ScheduleKind k) {
  return k == ScheduleKind::kCosine ? "cosine" : "linear_beta";
}

NoiseSchedule::NoiseSchedule(int k_max, std::vector<double> alpha_bar)
    : k_max_(k_max), alpha_bar_(std::move(alpha_bar)) {
  if (k_max_ < 1) throw std::invalid_argument("NoiseSchedule: k_max must be >= 1");
  if (alpha_bar_.size() != static_cast<size_t>(k_max_) + 1) {
    throw std::invalid_argument("NoiseSchedule: needs k_max+1 entries");
  }
  if (!(alpha_bar_[0] > 0.99 && alpha_bar_[0] <= 1.0)) {
    throw std::invalid_argument("NoiseSchedule: alpha_bar[0] must lie in (0.99, 1]");
  }
  for (int k = 1; k <= k_max_; ++k) {
    if (!(alpha_bar_[static_cast<size_t>(k)] < alpha_bar_[static_cast<size_t>(k - 1)])) {
      throw std::invalid_argument("NoiseSchedule: alpha_bar must be strictly decreasing");
    }
  }
  double last = alpha_bar_[static_cast<size_t>(k_max_)];
  if (!(last >= 0.0 && last < 0.05)) {
    throw std::invalid_argument("NoiseSchedule: alpha_bar[k_max] must lie in [0, 0.05)");
  }
}

NoiseSchedule make_schedule(int k_max, ScheduleKind kind) {
  if (k_max < 1) throw std::invalid_argument("make_schedule: k_max must be >= 1");
  std::vector<double> ab(static_cast<size_t>(k_max) + 1, 1.0);
  if (kind == ScheduleKind::kCosine) {
    const double s = 0.008;
    auto f = [&](double k) {
      double a = std::cos((k / k_max + s) / (1.0 + s) * (M_PI / 2.0));
      return a * a;
    };
    double f0 = f(0.0);
    double prev = 1.0;
    for (int k = 1; k <= k_max; ++k) {
      double target = f(static_cast<double>(k)) / f0;
      double beta = std::clamp(1.0 - target / prev, 1e-8, 0.999);
      ab[static_cast<size_t>(k)] = prev * (1.0 - beta);
      prev = ab[static_cast<size_t>(k)];
    }
  } else {
    // betas in [1e-4, 0.02] at the reference 1000-step length, rescaled so
    // retention still decays to ~0 over shorter schedules
    double scale = 1000.0 / k_max;
    double lo = 1e-4 * scale, hi = 0.02 * scale;
    double prev = 1.0;
    for (int k = 1; k <= k_max; ++k) {
      double beta = lo + (hi - lo) * (k - 1) / std::max(1, k_max - 1);
      beta = std::min(beta, 0.999);
      ab[static_cast<size_t>(k)] = prev * (1.0 - beta);
      prev = ab[static_cast<size_t>(k)];
    }
  }
  return NoiseSchedule(k_max, std::move(ab));
}

}  // namespace hpga::diffusion
