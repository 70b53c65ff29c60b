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

#ifndef HPGA_AD_TAPE_HPP_
#define HPGA_AD_TAPE_HPP_

#include <functional>
#include <vector>

#include "hpga/ad/params.hpp"
#include "hpga/ad/tensor.hpp"

namespace hpga::ad {

// Reverse-mode tape. Ops append nodes in topological order and compute values
// eagerly; the same recorded kernels re-execute cheaply via replay(), so one
// tape can be reused across optimizer steps or sampler iterations by
// refreshing leaf values.
class Tape {
 public:
  using Kernel = std::function<void(Tape&, int)>;

  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<int> parents;
    Kernel fwd;  // recompute value from parents; empty for leaves
    Kernel bwd;  // scatter grad(self) into parent grads; empty for leaves
    const char* op = "leaf";
    // bumped whenever a leaf's value changes; kernels use it to cache
    // derived forms (e.g. transposed weights) across replays
    uint64_t version = 0;
  };

  // Leaf holding an input value.
  int leaf(Tensor v);
  // Leaf bound to a parameter tensor; refresh_params()/accumulate_param_grads()
  // use the binding.
  int param(const ModelParams& p, ParamRef r);

  // Used by op builders: appends a node and runs its forward kernel once.
  int emplace(const char* op, std::vector<int> parents, Tensor value_placeholder,
              Kernel fwd, Kernel bwd);

  int size() const { return static_cast<int>(nodes_.size()); }
  Node& node(int i) { return nodes_[static_cast<size_t>(i)]; }
  Tensor& value(int i) { return nodes_[static_cast<size_t>(i)].value; }
  const Tensor& value(int i) const { return nodes_[static_cast<size_t>(i)].value; }
  Tensor& grad(int i) { return nodes_[static_cast<size_t>(i)].grad; }

  // Overwrite a leaf's value; invalidates downstream values until replay().
  void set_leaf(int i, const Tensor& v);
  void refresh_params(const ModelParams& p);

  // Recompute every non-leaf value in recording order.
  void replay();

  void zero_grads();
  // Reverse sweep from `root` seeded with `seed` (same shape as value(root)).
  // Throws std::logic_error if leaf values changed without a replay().
  void backward(int root, const Tensor& seed);
  void backward_scalar(int root);

  // Adds the gradients sitting on param leaves into the store's buffers.
  void accumulate_param_grads(ModelParams& p) const;

  std::vector<int> param_leaf_ids() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::pair<int, ParamRef>> param_bindings_;
  bool values_stale_ = false;
};

}  // namespace hpga::ad

#endif  // HPGA_AD_TAPE_HPP_
