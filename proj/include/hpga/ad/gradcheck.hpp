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

#ifndef HPGA_AD_GRADCHECK_HPP_
#define HPGA_AD_GRADCHECK_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hpga/ad/tape.hpp"

namespace hpga::ad {

// A gradcheck case: a freshly built graph plus the leaves to differentiate.
// Builders sample inputs away from non-smooth loci by construction.
struct GradCheckCase {
  std::unique_ptr<Tape> tape;
  int output = -1;
  std::vector<int> inputs;
};

using GradCheckBuilder = std::function<GradCheckCase(Rng&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
};

// Registers a named case builder; later registrations with the same name
// replace earlier ones.
void register_gradcheck(const std::string& op_name, GradCheckBuilder builder);

// Registers every primitive op in this library. Idempotent.
void register_builtin_gradchecks();

std::vector<std::string> registered_gradchecks();

// Compares reverse-mode gradients against central finite differences
// (h = 1e-6, 64-bit) over `trials` random graphs. Throws std::out_of_range
// for unknown ops. Relative error uses a 1e-3 magnitude floor; at most
// `max_coords` coordinates per leaf are probed (all when fewer).
GradCheckReport gradcheck(const std::string& op_name, int trials, double tol = 1e-4,
                          uint64_t seed = 20260101, int max_coords = 160);

}  // namespace hpga::ad

#endif  // HPGA_AD_GRADCHECK_HPP_
