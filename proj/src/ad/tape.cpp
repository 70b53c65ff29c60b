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

#include "hpga/ad/tape.hpp"

#include <stdexcept>

namespace hpga::ad {

int Tape::leaf(Tensor v) {
  Node n;
  n.grad = Tensor(v.shape());
  n.value = std::move(v);
  n.op = "leaf";
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::param(const ModelParams& p, ParamRef r) {
  int id = leaf(p.get(r));
  nodes_.back().op = "param";
  param_bindings_.emplace_back(id, r);
  return id;
}

int Tape::emplace(const char* op, std::vector<int> parents, Tensor value_placeholder,
                  Kernel fwd, Kernel bwd) {
  Node n;
  n.grad = Tensor(value_placeholder.shape());
  n.value = std::move(value_placeholder);
  n.parents = std::move(parents);
  n.fwd = std::move(fwd);
  n.bwd = std::move(bwd);
  n.op = op;
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size()) - 1;
  nodes_.back().fwd(*this, id);
  return id;
}

void Tape::set_leaf(int i, const Tensor& v) {
  Node& n = nodes_[static_cast<size_t>(i)];
  if (n.fwd) throw std::logic_error("set_leaf: node is not a leaf");
  if (!n.value.same_shape(v)) throw std::invalid_argument("set_leaf: shape mismatch");
  n.value = v;
  ++n.version;
  values_stale_ = true;
}

void Tape::refresh_params(const ModelParams& p) {
  for (const auto& [id, ref] : param_bindings_) {
    Node& n = nodes_[static_cast<size_t>(id)];
    n.value = p.get(ref);
    ++n.version;
  }
  values_stale_ = true;
}

void Tape::replay() {
  for (int i = 0; i < size(); ++i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.fwd) n.fwd(*this, i);
  }
  values_stale_ = false;
}

void Tape::zero_grads() {
  for (Node& n : nodes_) n.grad.zero();
}

void Tape::backward(int root, const Tensor& seed) {
  if (values_stale_) {
    throw std::logic_error("backward: leaf values changed since last forward/replay");
  }
  if (root < 0 || root >= size()) throw std::invalid_argument("backward: bad root id");
  Node& r = nodes_[static_cast<size_t>(root)];
  if (!r.value.same_shape(seed)) throw std::invalid_argument("backward: seed shape mismatch");
  for (int64_t i = 0; i < seed.numel(); ++i) r.grad[i] += seed[i];
  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.bwd) n.bwd(*this, i);
  }
}

void Tape::backward_scalar(int root) { backward(root, Tensor::scalar(1.0)); }

void Tape::accumulate_param_grads(ModelParams& p) const {
  for (const auto& [id, ref] : param_bindings_) {
    p.accumulate_grad(ref, nodes_[static_cast<size_t>(id)].grad);
  }
}

std::vector<int> Tape::param_leaf_ids() const {
  std::vector<int> ids;
  ids.reserve(param_bindings_.size());
  for (const auto& [id, ref] : param_bindings_) ids.push_back(id);
  return ids;
}

}  // namespace hpga::ad
