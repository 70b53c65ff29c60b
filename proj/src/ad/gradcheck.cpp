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

#include "hpga/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "hpga/ad/ops.hpp"

namespace hpga::ad {

namespace {

std::map<std::string, GradCheckBuilder>& registry() {
  static std::map<std::string, GradCheckBuilder> r;
  return r;
}

Tensor randn(std::vector<int> shape, Rng& rng) { return Tensor::randn(std::move(shape), rng); }

// Keeps |grade-0 slot| of every channel away from zero so finite differences
// stay in a smooth, well-conditioned region.
Tensor randn_gated(std::vector<int> shape, Rng& rng, double min_scalar) {
  Tensor t = randn(std::move(shape), rng);
  int64_t cells = t.numel() / 16;
  for (int64_t c = 0; c < cells; ++c) {
    double& s = t[c * 16];
    s = (s >= 0.0 ? 1.0 : -1.0) * (min_scalar + std::abs(s));
  }
  return t;
}

}  // namespace

void register_gradcheck(const std::string& op_name, GradCheckBuilder builder) {
  registry()[op_name] = std::move(builder);
}

std::vector<std::string> registered_gradchecks() {
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

void register_builtin_gradchecks() {
  static bool done = false;
  if (done) return;
  done = true;

  auto simple = [](std::vector<std::vector<int>> shapes,
                   std::function<int(Tape&, const std::vector<int>&)> build) {
    return [shapes, build](Rng& rng) {
      GradCheckCase cs;
      cs.tape = std::make_unique<Tape>();
      for (const auto& s : shapes) cs.inputs.push_back(cs.tape->leaf(randn(s, rng)));
      cs.output = build(*cs.tape, cs.inputs);
      return cs;
    };
  };

  register_gradcheck("identity", simple({{2, 3}}, [](Tape& t, const std::vector<int>& in) {
                       return identity_op(t, in[0]);
                     }));
  register_gradcheck("reshape", simple({{2, 6}}, [](Tape& t, const std::vector<int>& in) {
                       return reshape(t, in[0], {3, 4});
                     }));
  register_gradcheck("concat", simple({{2, 2, 3}, {2, 4, 3}},
                                      [](Tape& t, const std::vector<int>& in) {
                                        return concat(t, in[0], in[1], 1);
                                      }));
  register_gradcheck("slice", simple({{2, 5, 3}}, [](Tape& t, const std::vector<int>& in) {
                       return slice(t, in[0], 1, 1, 3);
                     }));
  register_gradcheck("add", simple({{2, 3}, {2, 3}}, [](Tape& t, const std::vector<int>& in) {
                       return add(t, in[0], in[1]);
                     }));
  register_gradcheck("sub", simple({{2, 3}, {2, 3}}, [](Tape& t, const std::vector<int>& in) {
                       return sub(t, in[0], in[1]);
                     }));
  register_gradcheck("mul", simple({{2, 3}, {2, 3}}, [](Tape& t, const std::vector<int>& in) {
                       return mul(t, in[0], in[1]);
                     }));
  register_gradcheck("scale", simple({{2, 3}}, [](Tape& t, const std::vector<int>& in) {
                       return scale(t, in[0], 1.7);
                     }));
  register_gradcheck("gelu", simple({{2, 5}}, [](Tape& t, const std::vector<int>& in) {
                       return gelu(t, in[0]);
                     }));
  register_gradcheck("clamp", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    Tensor x = randn({2, 5}, rng);
    for (int64_t i = 0; i < x.numel(); ++i) {
      // keep samples away from the kinks at the bounds
      while (std::abs(std::abs(x[i]) - 1.5) < 0.05) x[i] = rng.normal();
    }
    cs.inputs = {cs.tape->leaf(x)};
    cs.output = clamp(*cs.tape, cs.inputs[0], -1.5, 1.5);
    return cs;
  });
  register_gradcheck("mul_bcast0", simple({{3, 2, 2}, {3}},
                                          [](Tape& t, const std::vector<int>& in) {
                                            return mul_bcast0(t, in[0], in[1]);
                                          }));
  register_gradcheck("add_bcast_tokens", simple({{2, 3, 5}, {2, 5}},
                                                [](Tape& t, const std::vector<int>& in) {
                                                  return add_bcast_tokens(t, in[0], in[1]);
                                                }));
  register_gradcheck("add_bcast_rows", simple({{2, 3, 5}, {3, 5}},
                                              [](Tape& t, const std::vector<int>& in) {
                                                return add_bcast_rows(t, in[0], in[1]);
                                              }));
  register_gradcheck("scale_shift", simple({{2, 3, 5}, {2, 5}, {2, 5}},
                                           [](Tape& t, const std::vector<int>& in) {
                                             return scale_shift(t, in[0], in[1], in[2]);
                                           }));
  register_gradcheck("mul_bcast_lastdim", simple({{2, 3, 2, 16}, {2, 3, 2, 1}},
                                                 [](Tape& t, const std::vector<int>& in) {
                                                   return mul_bcast_lastdim(t, in[0], in[1]);
                                                 }));
  register_gradcheck("mul_bcast_bt", simple({{2, 3, 2, 16}, {2, 3}},
                                            [](Tape& t, const std::vector<int>& in) {
                                              return mul_bcast_bt(t, in[0], in[1]);
                                            }));
  register_gradcheck("sum_all", simple({{2, 4}}, [](Tape& t, const std::vector<int>& in) {
                       return sum_all(t, in[0]);
                     }));
  register_gradcheck("mse", simple({{2, 4}, {2, 4}}, [](Tape& t, const std::vector<int>& in) {
                       return mse(t, in[0], in[1]);
                     }));
  register_gradcheck("mse_per_sample", simple({{3, 4}, {3, 4}},
                                              [](Tape& t, const std::vector<int>& in) {
                                                return mse_per_sample(t, in[0], in[1]);
                                              }));
  register_gradcheck("linear", simple({{2, 3, 4}, {5, 4}, {5}},
                                      [](Tape& t, const std::vector<int>& in) {
                                        return linear(t, in[0], in[1], in[2]);
                                      }));
  register_gradcheck("conv1d", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    int stride = rng.uniform_int(1, 2);
    cs.inputs = {cs.tape->leaf(randn({2, 4, 3}, rng)), cs.tape->leaf(randn({5, 3, 3}, rng)),
                 cs.tape->leaf(randn({5}, rng))};
    cs.output = conv1d(*cs.tape, cs.inputs[0], cs.inputs[1], cs.inputs[2], stride, 1);
    return cs;
  });
  register_gradcheck("upsample2", simple({{2, 3, 4}}, [](Tape& t, const std::vector<int>& in) {
                       return upsample2(t, in[0]);
                     }));
  register_gradcheck("layer_norm", simple({{2, 3, 6}, {6}, {6}},
                                          [](Tape& t, const std::vector<int>& in) {
                                            return layer_norm(t, in[0], in[1], in[2]);
                                          }));
  register_gradcheck("sdpa", simple({{2, 3, 8}, {2, 4, 8}, {2, 4, 8}},
                                    [](Tape& t, const std::vector<int>& in) {
                                      return sdpa(t, in[0], in[1], in[2], 2);
                                    }));
  register_gradcheck("equi_linear", simple({{2, 3, 3, 16}, {2, 3, 5}, {2, 3, 4}},
                                           [](Tape& t, const std::vector<int>& in) {
                                             return equi_linear(t, in[0], in[1], in[2]);
                                           }));
  register_gradcheck("pga_geometric", simple({{2, 2, 3, 16}, {2, 2, 3, 16}},
                                             [](Tape& t, const std::vector<int>& in) {
                                               return pga_geometric(t, in[0], in[1]);
                                             }));
  register_gradcheck("pga_join", simple({{2, 2, 3, 16}, {2, 2, 3, 16}},
                                        [](Tape& t, const std::vector<int>& in) {
                                          return pga_join(t, in[0], in[1]);
                                        }));
  register_gradcheck("mv_attention", simple({{1, 3, 4, 16}, {1, 3, 4, 16}, {1, 3, 4, 16}},
                                            [](Tape& t, const std::vector<int>& in) {
                                              return mv_attention(t, in[0], in[1], in[2], 2);
                                            }));
  register_gradcheck("gated_gelu", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    cs.inputs = {cs.tape->leaf(randn_gated({2, 2, 3, 16}, rng, 0.1))};
    cs.output = gated_gelu(*cs.tape, cs.inputs[0]);
    return cs;
  });
  register_gradcheck("equi_layernorm", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    Tensor x = randn({2, 2, 3, 16}, rng);
    x[2] += 1.0;  // pin the invariant norm away from zero
    cs.inputs = {cs.tape->leaf(x)};
    cs.output = equi_layernorm(*cs.tape, cs.inputs[0]);
    return cs;
  });
  register_gradcheck("grade_project", [](Rng& rng) {
    GradCheckCase cs;
    cs.tape = std::make_unique<Tape>();
    cs.inputs = {cs.tape->leaf(randn({2, 2, 2, 16}, rng))};
    cs.output = grade_project_op(*cs.tape, cs.inputs[0], rng.uniform_int(0, 4));
    return cs;
  });
  register_gradcheck("add_scalar_slot", simple({{2, 3, 2, 16}, {3}},
                                               [](Tape& t, const std::vector<int>& in) {
                                                 return add_scalar_slot(t, in[0], in[1]);
                                               }));
}

GradCheckReport gradcheck(const std::string& op_name, int trials, double tol, uint64_t seed,
                          int max_coords) {
  auto it = registry().find(op_name);
  if (it == registry().end()) {
    throw std::out_of_range("gradcheck: unknown op '" + op_name + "'");
  }
  Rng rng(seed ^ std::hash<std::string>{}(op_name));
  const double h = 1e-6;
  double max_err = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    GradCheckCase cs = it->second(rng);
    Tape& tape = *cs.tape;
    Tensor u = Tensor::randn(tape.value(cs.output).shape(), rng);
    tape.zero_grads();
    tape.backward(cs.output, u);
    std::vector<Tensor> analytic;
    analytic.reserve(cs.inputs.size());
    for (int leaf : cs.inputs) analytic.push_back(tape.grad(leaf));

    for (size_t li = 0; li < cs.inputs.size(); ++li) {
      int leaf = cs.inputs[li];
      Tensor base = tape.value(leaf);
      std::vector<int64_t> coords;
      if (base.numel() <= max_coords) {
        for (int64_t c = 0; c < base.numel(); ++c) coords.push_back(c);
      } else {
        for (int c = 0; c < max_coords; ++c) {
          coords.push_back(static_cast<int64_t>(rng.next() % static_cast<uint64_t>(base.numel())));
        }
      }
      Tensor work = base;
      for (int64_t c : coords) {
        double x0 = base[c];
        double p_plus = x0 + h;
        double p_minus = x0 - h;
        work[c] = p_plus;
        tape.set_leaf(leaf, work);
        tape.replay();
        Tensor f_plus = tape.value(cs.output);
        work[c] = p_minus;
        tape.set_leaf(leaf, work);
        tape.replay();
        const Tensor& f_minus = tape.value(cs.output);
        double denom = p_plus - p_minus;
        double fd = 0.0;
        for (int64_t i = 0; i < u.numel(); ++i) {
          double d = f_plus[i] - f_minus[i];
          if (d != 0.0) fd += u[i] * (d / denom);
        }
        double ga = analytic[li][c];
        double err = std::abs(ga - fd) / std::max({1e-3, std::abs(ga), std::abs(fd)});
        max_err = std::max(max_err, err);
        work[c] = x0;
      }
      tape.set_leaf(leaf, base);
      tape.replay();
    }
  }
  return {max_err, max_err <= tol};
}

}  // namespace hpga::ad
