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

#include "hpga/ad/ops.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "hpga/pga/blades.hpp"

namespace hpga::ad {

namespace {

using pga::kEuclideanBlade;
using pga::kGrade;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch (" + detail + ")");
}

void require(bool ok, const char* op, const char* detail) {
  if (!ok) shape_error(op, detail);
}

int64_t prod_range(const std::vector<int>& s, int lo, int hi) {
  int64_t p = 1;
  for (int i = lo; i < hi; ++i) p *= s[static_cast<size_t>(i)];
  return p;
}

// Entry list for a 16x16 bilinear blade table.
struct BilinearEntry {
  int i, j, k;
  double sign;
};

std::vector<BilinearEntry> build_entries(const pga::ProductTable& table) {
  std::vector<BilinearEntry> out;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      const pga::BladeProduct& p = table[i][j];
      if (p.sign != 0) out.push_back({i, j, p.index, static_cast<double>(p.sign)});
    }
  }
  return out;
}

const std::vector<BilinearEntry>& geometric_entries() {
  static const std::vector<BilinearEntry> e = build_entries(pga::kGeometricTable);
  return e;
}
const std::vector<BilinearEntry>& join_entries() {
  static const std::vector<BilinearEntry> e = build_entries(pga::kJoinTable);
  return e;
}

// e0-junction index pairs for the equivariant linear map: blade src (no e0)
// maps to e0^src with sign +1.
constexpr int kE0PairCount = 8;
constexpr int kE0Src[kE0PairCount] = {0, 2, 3, 4, 8, 9, 10, 14};
constexpr int kE0Dst[kE0PairCount] = {1, 5, 6, 7, 11, 12, 13, 15};

}  // namespace

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_derivative(double x) {
  double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  double pdf = std::exp(-0.5 * x * x) * 0.3989422804014327;  // 1/sqrt(2*pi)
  return cdf + x * pdf;
}

// -- structure ---------------------------------------------------------------

int reshape(Tape& t, int a, std::vector<int> shape) {
  require(shape_numel(shape) == t.value(a).numel(), "reshape", "element count");
  Tensor out(shape);
  return t.emplace(
      "reshape", {a}, std::move(out),
      [](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int64_t i = 0; i < x.numel(); ++i) n.value[i] = x[i];
      },
      [](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        for (int64_t i = 0; i < n.grad.numel(); ++i) gx[i] += n.grad[i];
      });
}

int identity_op(Tape& t, int a) { return reshape(t, a, t.value(a).shape()); }

int concat(Tape& t, int a, int b, int axis) {
  const auto& sa = t.value(a).shape();
  const auto& sb = t.value(b).shape();
  require(sa.size() == sb.size(), "concat", "rank");
  for (size_t i = 0; i < sa.size(); ++i) {
    if (static_cast<int>(i) != axis) require(sa[i] == sb[i], "concat", "non-axis dims");
  }
  std::vector<int> so = sa;
  so[static_cast<size_t>(axis)] += sb[static_cast<size_t>(axis)];
  int rank = static_cast<int>(sa.size());
  int64_t outer = prod_range(sa, 0, axis);
  int64_t inner = prod_range(sa, axis + 1, rank);
  int64_t da = sa[static_cast<size_t>(axis)], db = sb[static_cast<size_t>(axis)];
  return t.emplace(
      "concat", {a, b}, Tensor(so),
      [outer, inner, da, db](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        for (int64_t o = 0; o < outer; ++o) {
          double* dst = n.value.data() + o * (da + db) * inner;
          const double* sx = x.data() + o * da * inner;
          const double* sy = y.data() + o * db * inner;
          for (int64_t i = 0; i < da * inner; ++i) dst[i] = sx[i];
          for (int64_t i = 0; i < db * inner; ++i) dst[da * inner + i] = sy[i];
        }
      },
      [outer, inner, da, db](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gy = t.grad(n.parents[1]);
        for (int64_t o = 0; o < outer; ++o) {
          const double* g = n.grad.data() + o * (da + db) * inner;
          double* dx = gx.data() + o * da * inner;
          double* dy = gy.data() + o * db * inner;
          for (int64_t i = 0; i < da * inner; ++i) dx[i] += g[i];
          for (int64_t i = 0; i < db * inner; ++i) dy[i] += g[da * inner + i];
        }
      });
}

int slice(Tape& t, int a, int axis, int start, int len) {
  const auto& sa = t.value(a).shape();
  int rank = static_cast<int>(sa.size());
  require(axis >= 0 && axis < rank, "slice", "axis");
  require(start >= 0 && len >= 1 && start + len <= sa[static_cast<size_t>(axis)], "slice",
          "range");
  std::vector<int> so = sa;
  so[static_cast<size_t>(axis)] = len;
  int64_t outer = prod_range(sa, 0, axis);
  int64_t inner = prod_range(sa, axis + 1, rank);
  int64_t dfull = sa[static_cast<size_t>(axis)];
  return t.emplace(
      "slice", {a}, Tensor(so),
      [outer, inner, dfull, start, len](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int64_t o = 0; o < outer; ++o) {
          const double* src = x.data() + (o * dfull + start) * inner;
          double* dst = n.value.data() + o * len * inner;
          for (int64_t i = 0; i < len * inner; ++i) dst[i] = src[i];
        }
      },
      [outer, inner, dfull, start, len](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        for (int64_t o = 0; o < outer; ++o) {
          double* dst = gx.data() + (o * dfull + start) * inner;
          const double* g = n.grad.data() + o * len * inner;
          for (int64_t i = 0; i < len * inner; ++i) dst[i] += g[i];
        }
      });
}

// -- elementwise -------------------------------------------------------------

namespace {
template <class Fwd, class Bwd>
int binary_elementwise(const char* name, Tape& t, int a, int b, Fwd fwd, Bwd bwd) {
  require(t.value(a).same_shape(t.value(b)), name, "operands");
  return t.emplace(
      name, {a, b}, Tensor(t.value(a).shape()),
      [fwd](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        for (int64_t i = 0; i < x.numel(); ++i) n.value[i] = fwd(x[i], y[i]);
      },
      [bwd](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gy = t.grad(n.parents[1]);
        for (int64_t i = 0; i < x.numel(); ++i) bwd(n.grad[i], x[i], y[i], gx[i], gy[i]);
      });
}
}  // namespace

int add(Tape& t, int a, int b) {
  return binary_elementwise(
      "add", t, a, b, [](double x, double y) { return x + y; },
      [](double g, double, double, double& gx, double& gy) {
        gx += g;
        gy += g;
      });
}

int sub(Tape& t, int a, int b) {
  return binary_elementwise(
      "sub", t, a, b, [](double x, double y) { return x - y; },
      [](double g, double, double, double& gx, double& gy) {
        gx += g;
        gy -= g;
      });
}

int mul(Tape& t, int a, int b) {
  return binary_elementwise(
      "mul", t, a, b, [](double x, double y) { return x * y; },
      [](double g, double x, double y, double& gx, double& gy) {
        gx += g * y;
        gy += g * x;
      });
}

int scale(Tape& t, int a, double c) {
  return t.emplace(
      "scale", {a}, Tensor(t.value(a).shape()),
      [c](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int64_t i = 0; i < x.numel(); ++i) n.value[i] = c * x[i];
      },
      [c](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        for (int64_t i = 0; i < n.grad.numel(); ++i) gx[i] += c * n.grad[i];
      });
}

int clamp(Tape& t, int a, double lo, double hi) {
  require(lo < hi, "clamp", "bounds");
  return t.emplace(
      "clamp", {a}, Tensor(t.value(a).shape()),
      [lo, hi](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int64_t i = 0; i < x.numel(); ++i) {
          n.value[i] = x[i] < lo ? lo : (x[i] > hi ? hi : x[i]);
        }
      },
      [lo, hi](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        Tensor& gx = t.grad(n.parents[0]);
        for (int64_t i = 0; i < x.numel(); ++i) {
          if (x[i] > lo && x[i] < hi) gx[i] += n.grad[i];
        }
      });
}

int gelu(Tape& t, int a) {
  return t.emplace(
      "gelu", {a}, Tensor(t.value(a).shape()),
      [](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int64_t i = 0; i < x.numel(); ++i) n.value[i] = gelu_value(x[i]);
      },
      [](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        Tensor& gx = t.grad(n.parents[0]);
        for (int64_t i = 0; i < x.numel(); ++i) gx[i] += n.grad[i] * gelu_derivative(x[i]);
      });
}

// -- broadcasts --------------------------------------------------------------

int mul_bcast0(Tape& t, int a, int s) {
  const auto& sa = t.value(a).shape();
  require(t.value(s).rank() == 1 && t.value(s).dim(0) == sa[0], "mul_bcast0", "scale dim");
  int64_t inner = prod_range(sa, 1, static_cast<int>(sa.size()));
  return t.emplace(
      "mul_bcast0", {a, s}, Tensor(sa),
      [inner](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& sc = t.value(n.parents[1]);
        for (int b = 0; b < sc.dim(0); ++b) {
          double v = sc[b];
          const double* xp = x.data() + b * inner;
          double* op = n.value.data() + b * inner;
          for (int64_t i = 0; i < inner; ++i) op[i] = v * xp[i];
        }
      },
      [inner](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& sc = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gs = t.grad(n.parents[1]);
        for (int b = 0; b < sc.dim(0); ++b) {
          double v = sc[b];
          double acc = 0.0;
          const double* xp = x.data() + b * inner;
          const double* gp = n.grad.data() + b * inner;
          double* gxp = gx.data() + b * inner;
          for (int64_t i = 0; i < inner; ++i) {
            gxp[i] += v * gp[i];
            acc += gp[i] * xp[i];
          }
          gs[b] += acc;
        }
      });
}

int add_bcast_tokens(Tape& t, int x, int e) {
  const auto& sx = t.value(x).shape();
  const auto& se = t.value(e).shape();
  require(sx.size() == 3 && se.size() == 2 && se[0] == sx[0] && se[1] == sx[2],
          "add_bcast_tokens", "x (B,T,F), e (B,F)");
  int B = sx[0], T = sx[1], F = sx[2];
  return t.emplace(
      "add_bcast_tokens", {x, e}, Tensor(sx),
      [B, T, F](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& e = t.value(n.parents[1]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int f = 0; f < F; ++f) n.value.at(b, ti, f) = x.at(b, ti, f) + e.at(b, f);
      },
      [B, T, F](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& ge = t.grad(n.parents[1]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int f = 0; f < F; ++f) {
              double g = n.grad.at(b, ti, f);
              gx.at(b, ti, f) += g;
              ge.at(b, f) += g;
            }
      });
}

int add_bcast_rows(Tape& t, int x, int p) {
  const auto& sx = t.value(x).shape();
  const auto& sp = t.value(p).shape();
  require(sx.size() == 3 && sp.size() == 2 && sp[0] == sx[1] && sp[1] == sx[2],
          "add_bcast_rows", "x (B,T,F), p (T,F)");
  int B = sx[0], T = sx[1], F = sx[2];
  return t.emplace(
      "add_bcast_rows", {x, p}, Tensor(sx),
      [B, T, F](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& p = t.value(n.parents[1]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int f = 0; f < F; ++f) n.value.at(b, ti, f) = x.at(b, ti, f) + p.at(ti, f);
      },
      [B, T, F](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gp = t.grad(n.parents[1]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int f = 0; f < F; ++f) {
              double g = n.grad.at(b, ti, f);
              gx.at(b, ti, f) += g;
              gp.at(ti, f) += g;
            }
      });
}

int mul_bcast_lastdim(Tape& t, int x, int s) {
  const auto& sx = t.value(x).shape();
  const auto& ss = t.value(s).shape();
  require(sx.size() == ss.size(), "mul_bcast_lastdim", "rank");
  for (size_t i = 0; i + 1 < sx.size(); ++i) {
    require(sx[i] == ss[i], "mul_bcast_lastdim", "leading dims");
  }
  require(ss.back() == 1, "mul_bcast_lastdim", "s last dim must be 1");
  int64_t cells = t.value(s).numel();
  int N = sx.back();
  return t.emplace(
      "mul_bcast_lastdim", {x, s}, Tensor(sx),
      [cells, N](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& s = t.value(n.parents[1]);
        for (int64_t c = 0; c < cells; ++c) {
          double v = s[c];
          const double* xp = x.data() + c * N;
          double* op = n.value.data() + c * N;
          for (int i = 0; i < N; ++i) op[i] = v * xp[i];
        }
      },
      [cells, N](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& s = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gs = t.grad(n.parents[1]);
        for (int64_t c = 0; c < cells; ++c) {
          double v = s[c];
          double acc = 0.0;
          const double* xp = x.data() + c * N;
          const double* gp = n.grad.data() + c * N;
          double* gxp = gx.data() + c * N;
          for (int i = 0; i < N; ++i) {
            gxp[i] += v * gp[i];
            acc += gp[i] * xp[i];
          }
          gs[c] += acc;
        }
      });
}

int scale_shift(Tape& t, int h, int s, int b) {
  const auto& sh = t.value(h).shape();
  require(sh.size() == 3, "scale_shift", "h rank");
  const auto& ss = t.value(s).shape();
  require(ss.size() == 2 && ss[0] == sh[0] && ss[1] == sh[2], "scale_shift", "s dims");
  require(t.value(b).same_shape(t.value(s)), "scale_shift", "b dims");
  int B = sh[0], T = sh[1], F = sh[2];
  return t.emplace(
      "scale_shift", {h, s, b}, Tensor(sh),
      [B, T, F](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& h = t.value(n.parents[0]);
        const Tensor& s = t.value(n.parents[1]);
        const Tensor& bb = t.value(n.parents[2]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int f = 0; f < F; ++f)
              n.value.at(b, ti, f) = h.at(b, ti, f) * (1.0 + s.at(b, f)) + bb.at(b, f);
      },
      [B, T, F](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& h = t.value(n.parents[0]);
        const Tensor& s = t.value(n.parents[1]);
        Tensor& gh = t.grad(n.parents[0]);
        Tensor& gs = t.grad(n.parents[1]);
        Tensor& gb = t.grad(n.parents[2]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int f = 0; f < F; ++f) {
              double g = n.grad.at(b, ti, f);
              gh.at(b, ti, f) += g * (1.0 + s.at(b, f));
              gs.at(b, f) += g * h.at(b, ti, f);
              gb.at(b, f) += g;
            }
      });
}

int mul_bcast_bt(Tape& t, int x, int s) {
  const auto& sx = t.value(x).shape();
  const auto& ss = t.value(s).shape();
  require(sx.size() == 4 && ss.size() == 2 && ss[0] == sx[0] && ss[1] == sx[1],
          "mul_bcast_bt", "x (B,T,C,16), s (B,T)");
  int B = sx[0], T = sx[1];
  int64_t inner = static_cast<int64_t>(sx[2]) * sx[3];
  return t.emplace(
      "mul_bcast_bt", {x, s}, Tensor(sx),
      [B, T, inner](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& s = t.value(n.parents[1]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti) {
            double v = s.at(b, ti);
            const double* xp = x.data() + (static_cast<int64_t>(b) * T + ti) * inner;
            double* op = n.value.data() + (static_cast<int64_t>(b) * T + ti) * inner;
            for (int64_t i = 0; i < inner; ++i) op[i] = v * xp[i];
          }
      },
      [B, T, inner](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& s = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gs = t.grad(n.parents[1]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti) {
            double v = s.at(b, ti);
            double acc = 0.0;
            int64_t off = (static_cast<int64_t>(b) * T + ti) * inner;
            const double* xp = x.data() + off;
            const double* gp = n.grad.data() + off;
            double* gxp = gx.data() + off;
            for (int64_t i = 0; i < inner; ++i) {
              gxp[i] += v * gp[i];
              acc += gp[i] * xp[i];
            }
            gs.at(b, ti) += acc;
          }
      });
}

// -- reductions --------------------------------------------------------------

int sum_all(Tape& t, int a) {
  return t.emplace(
      "sum_all", {a}, Tensor({1}),
      [](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        double s = 0.0;
        for (int64_t i = 0; i < x.numel(); ++i) s += x[i];
        n.value[0] = s;
      },
      [](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        double g = n.grad[0];
        for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += g;
      });
}

int mean_all(Tape& t, int a) {
  return scale(t, sum_all(t, a), 1.0 / static_cast<double>(t.value(a).numel()));
}

int mse(Tape& t, int a, int b) {
  require(t.value(a).same_shape(t.value(b)), "mse", "operands");
  double inv_n = 1.0 / static_cast<double>(t.value(a).numel());
  return t.emplace(
      "mse", {a, b}, Tensor({1}),
      [inv_n](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        double s = 0.0;
        for (int64_t i = 0; i < x.numel(); ++i) {
          double d = x[i] - y[i];
          s += d * d;
        }
        n.value[0] = s * inv_n;
      },
      [inv_n](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gy = t.grad(n.parents[1]);
        double g = 2.0 * inv_n * n.grad[0];
        for (int64_t i = 0; i < x.numel(); ++i) {
          double d = g * (x[i] - y[i]);
          gx[i] += d;
          gy[i] -= d;
        }
      });
}

int mse_per_sample(Tape& t, int a, int b) {
  require(t.value(a).same_shape(t.value(b)), "mse_per_sample", "operands");
  const auto& sa = t.value(a).shape();
  int B = sa[0];
  int64_t inner = prod_range(sa, 1, static_cast<int>(sa.size()));
  double inv_n = 1.0 / static_cast<double>(inner);
  return t.emplace(
      "mse_per_sample", {a, b}, Tensor({B}),
      [B, inner, inv_n](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        for (int bi = 0; bi < B; ++bi) {
          const double* xp = x.data() + bi * inner;
          const double* yp = y.data() + bi * inner;
          double s = 0.0;
          for (int64_t i = 0; i < inner; ++i) {
            double d = xp[i] - yp[i];
            s += d * d;
          }
          n.value[bi] = s * inv_n;
        }
      },
      [B, inner, inv_n](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gy = t.grad(n.parents[1]);
        for (int bi = 0; bi < B; ++bi) {
          double g = 2.0 * inv_n * n.grad[bi];
          const double* xp = x.data() + bi * inner;
          const double* yp = y.data() + bi * inner;
          double* gxp = gx.data() + bi * inner;
          double* gyp = gy.data() + bi * inner;
          for (int64_t i = 0; i < inner; ++i) {
            double d = g * (xp[i] - yp[i]);
            gxp[i] += d;
            gyp[i] -= d;
          }
        }
      });
}

// -- dense / conv / attention -------------------------------------------------

int linear(Tape& t, int x, int w, int bias) {
  const auto& sx = t.value(x).shape();
  const auto& sw = t.value(w).shape();
  require(sw.size() == 2, "linear", "w rank");
  int fi = sx.back();
  require(fi == sw[1], "linear", "inner dim");
  int fo = sw[0];
  if (bias >= 0) {
    require(t.value(bias).rank() == 1 && t.value(bias).dim(0) == fo, "linear", "bias dim");
  }
  std::vector<int> so = sx;
  so.back() = fo;
  int64_t m = prod_range(sx, 0, static_cast<int>(sx.size()) - 1);
  std::vector<int> parents = {x, w};
  if (bias >= 0) parents.push_back(bias);
  // transposed weights cached across replays until the weight leaf changes
  auto cache = std::make_shared<std::pair<uint64_t, std::vector<double>>>(
      ~uint64_t{0}, std::vector<double>());
  return t.emplace(
      "linear", std::move(parents), Tensor(so),
      [m, fi, fo, bias, cache](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& w = t.value(n.parents[1]);
        const double* bp = bias >= 0 ? t.value(n.parents[2]).data() : nullptr;
        uint64_t wver = t.node(n.parents[1]).version;
        if (cache->first != wver) {
          cache->first = wver;
          cache->second.assign(static_cast<size_t>(fi) * fo, 0.0);
          for (int o = 0; o < fo; ++o)
            for (int i = 0; i < fi; ++i) cache->second[static_cast<size_t>(i) * fo + o] = w.at(o, i);
        }
        const std::vector<double>& wt = cache->second;
        for (int64_t r = 0; r < m; ++r) {
          double* op = n.value.data() + r * fo;
          if (bp) {
            for (int o = 0; o < fo; ++o) op[o] = bp[o];
          } else {
            for (int o = 0; o < fo; ++o) op[o] = 0.0;
          }
          const double* xp = x.data() + r * fi;
          for (int i = 0; i < fi; ++i) {
            double xv = xp[i];
            if (xv == 0.0) continue;
            const double* wr = wt.data() + static_cast<size_t>(i) * fo;
            for (int o = 0; o < fo; ++o) op[o] += xv * wr[o];
          }
        }
      },
      [m, fi, fo, bias](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& w = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gw = t.grad(n.parents[1]);
        for (int64_t r = 0; r < m; ++r) {
          const double* gp = n.grad.data() + r * fo;
          const double* xp = x.data() + r * fi;
          double* gxp = gx.data() + r * fi;
          for (int o = 0; o < fo; ++o) {
            double gv = gp[o];
            if (gv == 0.0) continue;
            const double* wr = w.data() + static_cast<size_t>(o) * fi;
            double* gwr = gw.data() + static_cast<size_t>(o) * fi;
            for (int i = 0; i < fi; ++i) {
              gxp[i] += gv * wr[i];
              gwr[i] += gv * xp[i];
            }
          }
        }
        if (bias >= 0) {
          Tensor& gb = t.grad(n.parents[2]);
          for (int64_t r = 0; r < m; ++r) {
            const double* gp = n.grad.data() + r * fo;
            for (int o = 0; o < fo; ++o) gb[o] += gp[o];
          }
        }
      });
}

int conv1d(Tape& t, int x, int w, int bias, int stride, int pad) {
  const auto& sx = t.value(x).shape();
  const auto& sw = t.value(w).shape();
  require(sx.size() == 3 && sw.size() == 3, "conv1d", "ranks");
  int B = sx[0], T = sx[1], ci = sx[2];
  int co = sw[0], K = sw[2];
  require(sw[1] == ci, "conv1d", "in channels");
  require(stride >= 1 && pad >= 0, "conv1d", "stride/pad");
  int to = (T + 2 * pad - K) / stride + 1;
  require(to >= 1, "conv1d", "output length");
  if (bias >= 0) require(t.value(bias).dim(0) == co, "conv1d", "bias dim");
  std::vector<int> parents = {x, w};
  if (bias >= 0) parents.push_back(bias);
  auto cache = std::make_shared<std::pair<uint64_t, std::vector<double>>>(
      ~uint64_t{0}, std::vector<double>());
  return t.emplace(
      "conv1d", std::move(parents), Tensor({B, to, co}),
      [B, T, ci, co, K, to, stride, pad, bias, cache](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& w = t.value(n.parents[1]);
        const double* bp = bias >= 0 ? t.value(n.parents[2]).data() : nullptr;
        uint64_t wver = t.node(n.parents[1]).version;
        if (cache->first != wver) {
          // wk[k][i][o]: reordered for contiguous output-channel loops
          cache->first = wver;
          cache->second.assign(static_cast<size_t>(K) * ci * co, 0.0);
          for (int o = 0; o < co; ++o)
            for (int i = 0; i < ci; ++i)
              for (int k = 0; k < K; ++k)
                cache->second[(static_cast<size_t>(k) * ci + i) * co + o] = w.at(o, i, k);
        }
        const std::vector<double>& wk = cache->second;
        for (int b = 0; b < B; ++b) {
          for (int ot = 0; ot < to; ++ot) {
            double* op = n.value.data() + (static_cast<int64_t>(b) * to + ot) * co;
            for (int o = 0; o < co; ++o) op[o] = bp ? bp[o] : 0.0;
            for (int k = 0; k < K; ++k) {
              int it = ot * stride + k - pad;
              if (it < 0 || it >= T) continue;
              const double* xp = x.data() + (static_cast<int64_t>(b) * T + it) * ci;
              const double* wkp = wk.data() + static_cast<size_t>(k) * ci * co;
              for (int i = 0; i < ci; ++i) {
                double xv = xp[i];
                if (xv == 0.0) continue;
                const double* wr = wkp + static_cast<size_t>(i) * co;
                for (int o = 0; o < co; ++o) op[o] += xv * wr[o];
              }
            }
          }
        }
      },
      [B, T, ci, co, K, to, stride, pad, bias](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& w = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gw = t.grad(n.parents[1]);
        for (int b = 0; b < B; ++b) {
          for (int ot = 0; ot < to; ++ot) {
            const double* gp = n.grad.data() + (static_cast<int64_t>(b) * to + ot) * co;
            for (int k = 0; k < K; ++k) {
              int it = ot * stride + k - pad;
              if (it < 0 || it >= T) continue;
              const double* xp = x.data() + (static_cast<int64_t>(b) * T + it) * ci;
              double* gxp = gx.data() + (static_cast<int64_t>(b) * T + it) * ci;
              for (int o = 0; o < co; ++o) {
                double gv = gp[o];
                if (gv == 0.0) continue;
                const double* wr = w.data() + (static_cast<size_t>(o) * ci) * K + k;
                double* gwr = gw.data() + (static_cast<size_t>(o) * ci) * K + k;
                for (int i = 0; i < ci; ++i) {
                  gxp[i] += gv * wr[static_cast<size_t>(i) * K];
                  gwr[static_cast<size_t>(i) * K] += gv * xp[i];
                }
              }
            }
          }
        }
        if (bias >= 0) {
          Tensor& gb = t.grad(n.parents[2]);
          for (int b = 0; b < B; ++b)
            for (int ot = 0; ot < to; ++ot) {
              const double* gp = n.grad.data() + (static_cast<int64_t>(b) * to + ot) * co;
              for (int o = 0; o < co; ++o) gb[o] += gp[o];
            }
        }
      });
}

int upsample2(Tape& t, int x) {
  const auto& sx = t.value(x).shape();
  require(sx.size() == 3, "upsample2", "rank");
  int B = sx[0], T = sx[1], C = sx[2];
  return t.emplace(
      "upsample2", {x}, Tensor({B, 2 * T, C}),
      [B, T, C](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int c = 0; c < C; ++c) {
              double v = x.at(b, ti, c);
              n.value.at(b, 2 * ti, c) = v;
              n.value.at(b, 2 * ti + 1, c) = v;
            }
      },
      [B, T, C](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int c = 0; c < C; ++c)
              gx.at(b, ti, c) += n.grad.at(b, 2 * ti, c) + n.grad.at(b, 2 * ti + 1, c);
      });
}

int layer_norm(Tape& t, int x, int gain, int bias, double eps) {
  const auto& sx = t.value(x).shape();
  int F = sx.back();
  require(t.value(gain).rank() == 1 && t.value(gain).dim(0) == F, "layer_norm", "gain");
  require(t.value(bias).rank() == 1 && t.value(bias).dim(0) == F, "layer_norm", "bias");
  int64_t m = prod_range(sx, 0, static_cast<int>(sx.size()) - 1);
  return t.emplace(
      "layer_norm", {x, gain, bias}, Tensor(sx),
      [m, F, eps](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& g = t.value(n.parents[1]);
        const Tensor& b = t.value(n.parents[2]);
        for (int64_t r = 0; r < m; ++r) {
          const double* xp = x.data() + r * F;
          double* op = n.value.data() + r * F;
          double mu = 0.0;
          for (int f = 0; f < F; ++f) mu += xp[f];
          mu /= F;
          double var = 0.0;
          for (int f = 0; f < F; ++f) {
            double d = xp[f] - mu;
            var += d * d;
          }
          var /= F;
          double inv = 1.0 / std::sqrt(var + eps);
          for (int f = 0; f < F; ++f) op[f] = g[f] * (xp[f] - mu) * inv + b[f];
        }
      },
      [m, F, eps](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& g = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gg = t.grad(n.parents[1]);
        Tensor& gb = t.grad(n.parents[2]);
        for (int64_t r = 0; r < m; ++r) {
          const double* xp = x.data() + r * F;
          const double* gp = n.grad.data() + r * F;
          double* gxp = gx.data() + r * F;
          double mu = 0.0;
          for (int f = 0; f < F; ++f) mu += xp[f];
          mu /= F;
          double var = 0.0;
          for (int f = 0; f < F; ++f) {
            double d = xp[f] - mu;
            var += d * d;
          }
          var /= F;
          double inv = 1.0 / std::sqrt(var + eps);
          // dxhat = g_out * gain; dx via the standard three-term formula
          double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
          for (int f = 0; f < F; ++f) {
            double xhat = (xp[f] - mu) * inv;
            double dxhat = gp[f] * g[f];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat;
            gg[f] += gp[f] * xhat;
            gb[f] += gp[f];
          }
          for (int f = 0; f < F; ++f) {
            double xhat = (xp[f] - mu) * inv;
            double dxhat = gp[f] * g[f];
            gxp[f] += inv * (dxhat - sum_dxhat / F - xhat * sum_dxhat_xhat / F);
          }
        }
      });
}

int sdpa(Tape& t, int q, int k, int v, int n_heads) {
  const auto& sq = t.value(q).shape();
  const auto& sk = t.value(k).shape();
  require(sq.size() == 3 && sk.size() == 3, "sdpa", "ranks");
  require(t.value(v).same_shape(t.value(k)), "sdpa", "k/v");
  require(sq[0] == sk[0] && sq[2] == sk[2], "sdpa", "batch/features");
  int B = sq[0], Tq = sq[1], Tk = sk[1], F = sq[2];
  require(F % n_heads == 0, "sdpa", "heads divide features");
  int H = n_heads, Dh = F / n_heads;
  double norm = 1.0 / std::sqrt(static_cast<double>(Dh));
  auto weights = std::make_shared<Tensor>(std::vector<int>{B, H, Tq, Tk});
  return t.emplace(
      "sdpa", {q, k, v}, Tensor(sq),
      [B, Tq, Tk, H, Dh, norm, weights](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& q = t.value(n.parents[0]);
        const Tensor& k = t.value(n.parents[1]);
        const Tensor& v = t.value(n.parents[2]);
        int F = H * Dh;
        n.value.zero();
        for (int b = 0; b < B; ++b) {
          for (int h = 0; h < H; ++h) {
            int off = h * Dh;
            for (int i = 0; i < Tq; ++i) {
              const double* qp = q.data() + (static_cast<int64_t>(b) * Tq + i) * F + off;
              double mx = -1e300;
              double* wrow = weights->data() +
                             ((static_cast<int64_t>(b) * H + h) * Tq + i) * Tk;
              for (int j = 0; j < Tk; ++j) {
                const double* kp = k.data() + (static_cast<int64_t>(b) * Tk + j) * F + off;
                double s = 0.0;
                for (int d = 0; d < Dh; ++d) s += qp[d] * kp[d];
                wrow[j] = s * norm;
                mx = std::max(mx, wrow[j]);
              }
              double z = 0.0;
              for (int j = 0; j < Tk; ++j) {
                wrow[j] = std::exp(wrow[j] - mx);
                z += wrow[j];
              }
              double* op = n.value.data() + (static_cast<int64_t>(b) * Tq + i) * F + off;
              for (int j = 0; j < Tk; ++j) {
                wrow[j] /= z;
                const double* vp = v.data() + (static_cast<int64_t>(b) * Tk + j) * F + off;
                for (int d = 0; d < Dh; ++d) op[d] += wrow[j] * vp[d];
              }
            }
          }
        }
      },
      [B, Tq, Tk, H, Dh, norm, weights](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& q = t.value(n.parents[0]);
        const Tensor& k = t.value(n.parents[1]);
        const Tensor& v = t.value(n.parents[2]);
        Tensor& gq = t.grad(n.parents[0]);
        Tensor& gk = t.grad(n.parents[1]);
        Tensor& gv = t.grad(n.parents[2]);
        int F = H * Dh;
        std::vector<double> dscore(static_cast<size_t>(Tk));
        for (int b = 0; b < B; ++b) {
          for (int h = 0; h < H; ++h) {
            int off = h * Dh;
            for (int i = 0; i < Tq; ++i) {
              const double* gp = n.grad.data() + (static_cast<int64_t>(b) * Tq + i) * F + off;
              const double* wrow = weights->data() +
                                   ((static_cast<int64_t>(b) * H + h) * Tq + i) * Tk;
              double dot = 0.0;
              for (int j = 0; j < Tk; ++j) {
                const double* vp = v.data() + (static_cast<int64_t>(b) * Tk + j) * F + off;
                double* gvp = gv.data() + (static_cast<int64_t>(b) * Tk + j) * F + off;
                double s = 0.0;
                for (int d = 0; d < Dh; ++d) {
                  s += gp[d] * vp[d];
                  gvp[d] += wrow[j] * gp[d];
                }
                dscore[static_cast<size_t>(j)] = s;
                dot += s * wrow[j];
              }
              const double* qp = q.data() + (static_cast<int64_t>(b) * Tq + i) * F + off;
              double* gqp = gq.data() + (static_cast<int64_t>(b) * Tq + i) * F + off;
              for (int j = 0; j < Tk; ++j) {
                double dlogit = wrow[j] * (dscore[static_cast<size_t>(j)] - dot) * norm;
                if (dlogit == 0.0) continue;
                const double* kp = k.data() + (static_cast<int64_t>(b) * Tk + j) * F + off;
                double* gkp = gk.data() + (static_cast<int64_t>(b) * Tk + j) * F + off;
                for (int d = 0; d < Dh; ++d) {
                  gqp[d] += dlogit * kp[d];
                  gkp[d] += dlogit * qp[d];
                }
              }
            }
          }
        }
      });
}

// -- multivector network primitives -------------------------------------------

int equi_linear(Tape& t, int x, int w, int v) {
  const auto& sx = t.value(x).shape();
  const auto& sw = t.value(w).shape();
  const auto& sv = t.value(v).shape();
  require(sx.size() == 4 && sx[3] == 16, "equi_linear", "x (B,T,Ci,16)");
  require(sw.size() == 3 && sw[2] == 5, "equi_linear", "w (Co,Ci,5)");
  require(sv.size() == 3 && sv[2] == 4, "equi_linear", "v (Co,Ci,4)");
  require(sw[1] == sx[2] && sv[0] == sw[0] && sv[1] == sw[1], "equi_linear", "channels");
  int B = sx[0], T = sx[1], ci = sx[2], co = sw[0];
  return t.emplace(
      "equi_linear", {x, w, v}, Tensor({B, T, co, 16}),
      [B, T, ci, co](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& w = t.value(n.parents[1]);
        const Tensor& v = t.value(n.parents[2]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti) {
            const double* xbase = x.data() + ((static_cast<int64_t>(b) * T + ti) * ci) * 16;
            double* obase = n.value.data() + ((static_cast<int64_t>(b) * T + ti) * co) * 16;
            for (int o = 0; o < co; ++o) {
              double acc[16] = {0};
              const double* wrow = w.data() + (static_cast<size_t>(o) * ci) * 5;
              const double* vrow = v.data() + (static_cast<size_t>(o) * ci) * 4;
              for (int i = 0; i < ci; ++i) {
                const double* xp = xbase + static_cast<size_t>(i) * 16;
                const double* wp = wrow + static_cast<size_t>(i) * 5;
                const double* vp = vrow + static_cast<size_t>(i) * 4;
                for (int m = 0; m < 16; ++m) acc[m] += wp[kGrade[m]] * xp[m];
                for (int p = 0; p < kE0PairCount; ++p) {
                  acc[kE0Dst[p]] += vp[kGrade[kE0Src[p]]] * xp[kE0Src[p]];
                }
              }
              double* op = obase + static_cast<size_t>(o) * 16;
              for (int m = 0; m < 16; ++m) op[m] = acc[m];
            }
          }
      },
      [B, T, ci, co](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& w = t.value(n.parents[1]);
        const Tensor& v = t.value(n.parents[2]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gw = t.grad(n.parents[1]);
        Tensor& gv = t.grad(n.parents[2]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti) {
            const double* xbase = x.data() + ((static_cast<int64_t>(b) * T + ti) * ci) * 16;
            double* gxbase = gx.data() + ((static_cast<int64_t>(b) * T + ti) * ci) * 16;
            const double* gbase = n.grad.data() + ((static_cast<int64_t>(b) * T + ti) * co) * 16;
            for (int o = 0; o < co; ++o) {
              const double* gp = gbase + static_cast<size_t>(o) * 16;
              const double* wrow = w.data() + (static_cast<size_t>(o) * ci) * 5;
              const double* vrow = v.data() + (static_cast<size_t>(o) * ci) * 4;
              double* gwrow = gw.data() + (static_cast<size_t>(o) * ci) * 5;
              double* gvrow = gv.data() + (static_cast<size_t>(o) * ci) * 4;
              for (int i = 0; i < ci; ++i) {
                const double* xp = xbase + static_cast<size_t>(i) * 16;
                double* gxp = gxbase + static_cast<size_t>(i) * 16;
                const double* wp = wrow + static_cast<size_t>(i) * 5;
                const double* vp = vrow + static_cast<size_t>(i) * 4;
                double* gwp = gwrow + static_cast<size_t>(i) * 5;
                double* gvp = gvrow + static_cast<size_t>(i) * 4;
                for (int m = 0; m < 16; ++m) {
                  gxp[m] += wp[kGrade[m]] * gp[m];
                  gwp[kGrade[m]] += xp[m] * gp[m];
                }
                for (int p = 0; p < kE0PairCount; ++p) {
                  int s = kE0Src[p], d = kE0Dst[p];
                  gxp[s] += vp[kGrade[s]] * gp[d];
                  gvp[kGrade[s]] += xp[s] * gp[d];
                }
              }
            }
          }
      });
}

namespace {
int pga_bilinear(const char* name, const std::vector<BilinearEntry>& entries, Tape& t,
                 int x, int y) {
  require(t.value(x).same_shape(t.value(y)), name, "operands");
  const auto& sx = t.value(x).shape();
  require(sx.size() == 4 && sx[3] == 16, name, "stack (B,T,C,16)");
  int64_t cells = t.value(x).numel() / 16;
  const std::vector<BilinearEntry>* ep = &entries;
  return t.emplace(
      name, {x, y}, Tensor(sx),
      [cells, ep](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        for (int64_t c = 0; c < cells; ++c) {
          const double* xp = x.data() + c * 16;
          const double* yp = y.data() + c * 16;
          double* op = n.value.data() + c * 16;
          for (int m = 0; m < 16; ++m) op[m] = 0.0;
          for (const BilinearEntry& e : *ep) op[e.k] += e.sign * xp[e.i] * yp[e.j];
        }
      },
      [cells, ep](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& y = t.value(n.parents[1]);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gy = t.grad(n.parents[1]);
        for (int64_t c = 0; c < cells; ++c) {
          const double* xp = x.data() + c * 16;
          const double* yp = y.data() + c * 16;
          const double* gp = n.grad.data() + c * 16;
          double* gxp = gx.data() + c * 16;
          double* gyp = gy.data() + c * 16;
          for (const BilinearEntry& e : *ep) {
            double g = e.sign * gp[e.k];
            gxp[e.i] += g * yp[e.j];
            gyp[e.j] += g * xp[e.i];
          }
        }
      });
}
}  // namespace

int pga_geometric(Tape& t, int x, int y) {
  return pga_bilinear("pga_geometric", geometric_entries(), t, x, y);
}

int pga_join(Tape& t, int x, int y) {
  return pga_bilinear("pga_join", join_entries(), t, x, y);
}

int mv_attention(Tape& t, int q, int k, int v, int n_heads) {
  require(t.value(q).same_shape(t.value(k)) && t.value(q).same_shape(t.value(v)),
          "mv_attention", "q/k/v");
  const auto& sq = t.value(q).shape();
  require(sq.size() == 4 && sq[3] == 16, "mv_attention", "stack (B,T,C,16)");
  int B = sq[0], T = sq[1], C = sq[2];
  require(C % n_heads == 0, "mv_attention", "heads divide channels");
  int H = n_heads, Ch = C / n_heads;
  double norm = 1.0 / std::sqrt(8.0 * Ch);
  auto weights = std::make_shared<Tensor>(std::vector<int>{B, H, T, T});
  return t.emplace(
      "mv_attention", {q, k, v}, Tensor(sq),
      [B, T, C, H, Ch, norm, weights](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& q = t.value(n.parents[0]);
        const Tensor& k = t.value(n.parents[1]);
        const Tensor& v = t.value(n.parents[2]);
        n.value.zero();
        for (int b = 0; b < B; ++b) {
          for (int h = 0; h < H; ++h) {
            int c0 = h * Ch;
            for (int i = 0; i < T; ++i) {
              double* wrow =
                  weights->data() + ((static_cast<int64_t>(b) * H + h) * T + i) * T;
              double mx = -1e300;
              for (int j = 0; j < T; ++j) {
                double s = 0.0;
                for (int c = c0; c < c0 + Ch; ++c) {
                  const double* qp =
                      q.data() + ((static_cast<int64_t>(b) * T + i) * C + c) * 16;
                  const double* kp =
                      k.data() + ((static_cast<int64_t>(b) * T + j) * C + c) * 16;
                  for (int m = 0; m < 16; ++m) {
                    if (kEuclideanBlade[m]) s += qp[m] * kp[m];
                  }
                }
                wrow[j] = s * norm;
                mx = std::max(mx, wrow[j]);
              }
              double z = 0.0;
              for (int j = 0; j < T; ++j) {
                wrow[j] = std::exp(wrow[j] - mx);
                z += wrow[j];
              }
              for (int j = 0; j < T; ++j) {
                wrow[j] /= z;
                for (int c = c0; c < c0 + Ch; ++c) {
                  const double* vp =
                      v.data() + ((static_cast<int64_t>(b) * T + j) * C + c) * 16;
                  double* op =
                      n.value.data() + ((static_cast<int64_t>(b) * T + i) * C + c) * 16;
                  for (int m = 0; m < 16; ++m) op[m] += wrow[j] * vp[m];
                }
              }
            }
          }
        }
      },
      [B, T, C, H, Ch, norm, weights](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& q = t.value(n.parents[0]);
        const Tensor& k = t.value(n.parents[1]);
        const Tensor& v = t.value(n.parents[2]);
        Tensor& gq = t.grad(n.parents[0]);
        Tensor& gk = t.grad(n.parents[1]);
        Tensor& gv = t.grad(n.parents[2]);
        std::vector<double> dscore(static_cast<size_t>(T));
        for (int b = 0; b < B; ++b) {
          for (int h = 0; h < H; ++h) {
            int c0 = h * Ch;
            for (int i = 0; i < T; ++i) {
              const double* wrow =
                  weights->data() + ((static_cast<int64_t>(b) * H + h) * T + i) * T;
              double dot = 0.0;
              for (int j = 0; j < T; ++j) {
                double s = 0.0;
                for (int c = c0; c < c0 + Ch; ++c) {
                  const double* gp =
                      n.grad.data() + ((static_cast<int64_t>(b) * T + i) * C + c) * 16;
                  const double* vp =
                      v.data() + ((static_cast<int64_t>(b) * T + j) * C + c) * 16;
                  double* gvp =
                      gv.data() + ((static_cast<int64_t>(b) * T + j) * C + c) * 16;
                  for (int m = 0; m < 16; ++m) {
                    s += gp[m] * vp[m];
                    gvp[m] += wrow[j] * gp[m];
                  }
                }
                dscore[static_cast<size_t>(j)] = s;
                dot += s * wrow[j];
              }
              for (int j = 0; j < T; ++j) {
                double dlogit = wrow[j] * (dscore[static_cast<size_t>(j)] - dot) * norm;
                if (dlogit == 0.0) continue;
                for (int c = c0; c < c0 + Ch; ++c) {
                  const double* qp =
                      q.data() + ((static_cast<int64_t>(b) * T + i) * C + c) * 16;
                  const double* kp =
                      k.data() + ((static_cast<int64_t>(b) * T + j) * C + c) * 16;
                  double* gqp =
                      gq.data() + ((static_cast<int64_t>(b) * T + i) * C + c) * 16;
                  double* gkp =
                      gk.data() + ((static_cast<int64_t>(b) * T + j) * C + c) * 16;
                  for (int m = 0; m < 16; ++m) {
                    if (!kEuclideanBlade[m]) continue;
                    gqp[m] += dlogit * kp[m];
                    gkp[m] += dlogit * qp[m];
                  }
                }
              }
            }
          }
        }
      });
}

int gated_gelu(Tape& t, int x) {
  const auto& sx = t.value(x).shape();
  require(sx.size() == 4 && sx[3] == 16, "gated_gelu", "stack (B,T,C,16)");
  int64_t cells = t.value(x).numel() / 16;
  return t.emplace(
      "gated_gelu", {x}, Tensor(sx),
      [cells](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int64_t c = 0; c < cells; ++c) {
          const double* xp = x.data() + c * 16;
          double* op = n.value.data() + c * 16;
          double g = gelu_value(xp[0]);
          for (int m = 0; m < 16; ++m) op[m] = g * xp[m];
        }
      },
      [cells](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        Tensor& gx = t.grad(n.parents[0]);
        for (int64_t c = 0; c < cells; ++c) {
          const double* xp = x.data() + c * 16;
          const double* gp = n.grad.data() + c * 16;
          double* gxp = gx.data() + c * 16;
          double g = gelu_value(xp[0]);
          double dg = gelu_derivative(xp[0]);
          double dot = 0.0;
          for (int m = 0; m < 16; ++m) {
            dot += gp[m] * xp[m];
            gxp[m] += g * gp[m];
          }
          gxp[0] += dg * dot;
        }
      });
}

int equi_layernorm(Tape& t, int x, double eps) {
  const auto& sx = t.value(x).shape();
  require(sx.size() == 4 && sx[3] == 16, "equi_layernorm", "stack (B,T,C,16)");
  int B = sx[0], T = sx[1], C = sx[2];
  return t.emplace(
      "equi_layernorm", {x}, Tensor(sx),
      [B, T, C, eps](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti) {
            const double* xp = x.data() + ((static_cast<int64_t>(b) * T + ti) * C) * 16;
            double* op = n.value.data() + ((static_cast<int64_t>(b) * T + ti) * C) * 16;
            double nrm = 0.0;
            for (int c = 0; c < C; ++c)
              for (int m = 0; m < 16; ++m) {
                if (kEuclideanBlade[m]) {
                  double v = xp[c * 16 + m];
                  nrm += v * v;
                }
              }
            nrm /= C;
            double r = 1.0 / std::sqrt(nrm + eps);
            for (int i = 0; i < C * 16; ++i) op[i] = r * xp[i];
          }
      },
      [B, T, C, eps](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        Tensor& gx = t.grad(n.parents[0]);
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti) {
            int64_t off = ((static_cast<int64_t>(b) * T + ti) * C) * 16;
            const double* xp = x.data() + off;
            const double* gp = n.grad.data() + off;
            double* gxp = gx.data() + off;
            double nrm = 0.0;
            for (int c = 0; c < C; ++c)
              for (int m = 0; m < 16; ++m) {
                if (kEuclideanBlade[m]) {
                  double v = xp[c * 16 + m];
                  nrm += v * v;
                }
              }
            nrm /= C;
            double r = 1.0 / std::sqrt(nrm + eps);
            double s = 0.0;
            for (int i = 0; i < C * 16; ++i) s += gp[i] * xp[i];
            double coef = s * r * r * r / C;
            for (int c = 0; c < C; ++c)
              for (int m = 0; m < 16; ++m) {
                int i = c * 16 + m;
                gxp[i] += r * gp[i];
                if (kEuclideanBlade[m]) gxp[i] -= coef * xp[i];
              }
          }
      });
}

int grade_project_op(Tape& t, int x, int k) {
  require(k >= 0 && k <= 4, "grade_project", "grade 0..4");
  const auto& sx = t.value(x).shape();
  require(sx.back() == 16, "grade_project", "last dim 16");
  int64_t cells = t.value(x).numel() / 16;
  return t.emplace(
      "grade_project", {x}, Tensor(sx),
      [cells, k](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        for (int64_t c = 0; c < cells; ++c)
          for (int m = 0; m < 16; ++m)
            n.value[c * 16 + m] = (kGrade[m] == k) ? x[c * 16 + m] : 0.0;
      },
      [cells, k](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        for (int64_t c = 0; c < cells; ++c)
          for (int m = 0; m < 16; ++m) {
            if (kGrade[m] == k) gx[c * 16 + m] += n.grad[c * 16 + m];
          }
      });
}

int add_scalar_slot(Tape& t, int x, int pos) {
  const auto& sx = t.value(x).shape();
  require(sx.size() == 4 && sx[3] == 16, "add_scalar_slot", "stack (B,T,C,16)");
  require(t.value(pos).rank() == 1 && t.value(pos).dim(0) == sx[1], "add_scalar_slot",
          "pos (T)");
  int B = sx[0], T = sx[1], C = sx[2];
  return t.emplace(
      "add_scalar_slot", {x, pos}, Tensor(sx),
      [B, T, C](Tape& t, int self) {
        auto& n = t.node(self);
        const Tensor& x = t.value(n.parents[0]);
        const Tensor& p = t.value(n.parents[1]);
        for (int64_t i = 0; i < x.numel(); ++i) n.value[i] = x[i];
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int c = 0; c < C; ++c)
              n.value[(((static_cast<int64_t>(b) * T + ti) * C) + c) * 16] += p[ti];
      },
      [B, T, C](Tape& t, int self) {
        auto& n = t.node(self);
        Tensor& gx = t.grad(n.parents[0]);
        Tensor& gp = t.grad(n.parents[1]);
        for (int64_t i = 0; i < n.grad.numel(); ++i) gx[i] += n.grad[i];
        for (int b = 0; b < B; ++b)
          for (int ti = 0; ti < T; ++ti)
            for (int c = 0; c < C; ++c)
              gp[ti] += n.grad[(((static_cast<int64_t>(b) * T + ti) * C) + c) * 16];
      });
}

}  // namespace hpga::ad
