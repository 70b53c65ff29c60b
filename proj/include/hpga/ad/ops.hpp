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

#ifndef HPGA_AD_OPS_HPP_
#define HPGA_AD_OPS_HPP_

#include <vector>

#include "hpga/ad/tape.hpp"

// Differentiable primitives. Each function appends one node to the tape and
// returns its id. Multivector stacks are tensors shaped (B, T, C, 16) in the
// canonical blade order.

namespace hpga::ad {

// -- structure ---------------------------------------------------------------
int reshape(Tape& t, int a, std::vector<int> shape);
int identity_op(Tape& t, int a);
int concat(Tape& t, int a, int b, int axis);
int slice(Tape& t, int a, int axis, int start, int len);

// -- elementwise -------------------------------------------------------------
int add(Tape& t, int a, int b);
int sub(Tape& t, int a, int b);
int mul(Tape& t, int a, int b);
int scale(Tape& t, int a, double c);
int clamp(Tape& t, int a, double lo, double hi);  // pass-through gradient inside
int gelu(Tape& t, int a);  // exact Gaussian CDF form

// -- broadcasts --------------------------------------------------------------
int mul_bcast0(Tape& t, int a, int s);        // a (B,...), s (B): per-sample scale
int add_bcast_tokens(Tape& t, int x, int e);  // x (B,T,F) += e (B,F) per token
int add_bcast_rows(Tape& t, int x, int p);    // x (B,T,F) += p (T,F) per batch
int scale_shift(Tape& t, int h, int s, int b);  // h*(1+s)+b, s/b (B,F)
int mul_bcast_bt(Tape& t, int x, int s);      // x (B,T,C,16) scaled by s (B,T)
int mul_bcast_lastdim(Tape& t, int x, int s);  // x (...,N) scaled by s (...,1)

// -- reductions --------------------------------------------------------------
int sum_all(Tape& t, int a);   // -> (1)
int mean_all(Tape& t, int a);  // -> (1)
int mse(Tape& t, int a, int b);             // mean squared error -> (1)
int mse_per_sample(Tape& t, int a, int b);  // mean over non-batch dims -> (B)

// -- dense / conv / attention -------------------------------------------------
// x (..., Fi) @ w (Fo, Fi) + b (Fo). Pass bias = -1 to omit.
int linear(Tape& t, int x, int w, int bias);
// x (B,T,Ci), w (Co,Ci,K), bias (Co) or -1; zero padding.
int conv1d(Tape& t, int x, int w, int bias, int stride, int pad);
int upsample2(Tape& t, int x);  // nearest-neighbor x2 along the time axis
// Normalizes over the last dim; gain/bias shaped (F).
int layer_norm(Tape& t, int x, int gain, int bias, double eps = 1e-5);
// Standard multi-head scaled dot-product attention, q (B,Tq,F), k/v (B,Tk,F).
int sdpa(Tape& t, int q, int k, int v, int n_heads);

// -- multivector network primitives -------------------------------------------
// x (B,T,Ci,16), w (Co,Ci,5) grade weights, v (Co,Ci,4) e0-junction weights.
int equi_linear(Tape& t, int x, int w, int v);
// Channel-pairwise geometric product / join of two stacks (B,T,C,16).
int pga_geometric(Tape& t, int x, int y);
int pga_join(Tape& t, int x, int y);
// Attention with invariant-inner-product logits; softmax over tokens.
int mv_attention(Tape& t, int q, int k, int v, int n_heads);
int gated_gelu(Tape& t, int x);
int equi_layernorm(Tape& t, int x, double eps = 1e-8);
int grade_project_op(Tape& t, int x, int k);
// Adds a learned per-token scalar to the grade-0 slot of every channel;
// x (B,T,C,16), pos (T).
int add_scalar_slot(Tape& t, int x, int pos);

// Exact GELU and its derivative (shared with kernels and tests).
double gelu_value(double x);
double gelu_derivative(double x);

}  // namespace hpga::ad

#endif  // HPGA_AD_OPS_HPP_
