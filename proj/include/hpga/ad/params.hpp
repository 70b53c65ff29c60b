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

#ifndef HPGA_AD_PARAMS_HPP_
#define HPGA_AD_PARAMS_HPP_

#include <string>
#include <vector>

#include "hpga/ad/tensor.hpp"

namespace hpga::ad {

// Handle to one named parameter tensor inside a group.
struct ParamRef {
  int group = -1;
  int entry = -1;
  bool valid() const { return group >= 0; }
};

// Named parameter groups (e.g. encoder / denoiser / decoder), each a flat
// vector with per-entry shape metadata and a mirrored gradient buffer.
class ModelParams {
 public:
  struct Entry {
    std::string name;
    std::vector<int> shape;
    int64_t offset = 0;
    int64_t size = 0;
  };
  struct Group {
    std::string name;
    std::vector<Entry> entries;
    std::vector<double> values;
    std::vector<double> grads;
  };

  int add_group(const std::string& name);
  int group_index(const std::string& name) const;  // -1 when absent
  int num_groups() const { return static_cast<int>(groups_.size()); }
  const Group& group(int g) const { return groups_[static_cast<size_t>(g)]; }
  Group& group(int g) { return groups_[static_cast<size_t>(g)]; }

  ParamRef add_param(int group, const std::string& name, const Tensor& init);

  Tensor get(const ParamRef& r) const;
  void set(const ParamRef& r, const Tensor& v);
  Tensor get_grad(const ParamRef& r) const;

  void zero_grads();
  void accumulate_grad(const ParamRef& r, const Tensor& g);

  int64_t group_size(int g) const { return static_cast<int64_t>(groups_[static_cast<size_t>(g)].values.size()); }
  int64_t total_size() const;

  // Checkpoint: versioned header, then per group the named entries with
  // shapes and raw little-endian float32 data.
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  const Entry& entry(const ParamRef& r) const;
  std::vector<Group> groups_;
};

}  // namespace hpga::ad

#endif  // HPGA_AD_PARAMS_HPP_
