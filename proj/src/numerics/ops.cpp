// Copyright 2026 The mcdrop Authors. All Rights Reserved.
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

#include "mcdrop/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mcdrop::ops {

namespace {

using detail::Node;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw std::invalid_argument(std::string(op) + ": " + detail);
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    shape_error(op, "expected rank " + std::to_string(rank) + ", got " +
                        shape_to_string(t.shape()));
  }
}

// C[n,m] += A[n,k] * B[k,m]
void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t n, std::size_t k,
             std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    Real* crow = c + i * m;
    const Real* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = arow[p];
      const Real* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[n,m] += A[n,k] * B[m,k]^T
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t n, std::size_t k,
             std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const Real* arow = a + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const Real* brow = b + j * k;
      Real acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[i * m + j] += acc;
    }
  }
}

// C[k,m] += A[n,k]^T * B[n,m]
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t n, std::size_t k,
             std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const Real* arow = a + i * k;
    const Real* brow = b + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = arow[p];
      Real* crow = c + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) {
    shape_error("matmul", shape_to_string(a.shape()) + " x " + shape_to_string(b.shape()));
  }
  std::vector<Real> out(n * m, Real(0));
  gemm_nn(a.data().data(), b.data().data(), out.data(), n, k, m);
  return Tensor::from_op({n, m}, std::move(out), {a, b}, [n, k, m](Node& self) {
    const Real* g = self.grad.data();
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) gemm_nt(g, pb.data.data(), pa.ensure_grad().data(), n, m, k);
    if (pb.requires_grad) gemm_tn(pa.data.data(), g, pb.ensure_grad().data(), n, k, m);
  });
}

Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b) {
  require_rank("bmm", a, 3);
  require_rank("bmm", b, 3);
  const std::size_t groups = a.dim(0), n = a.dim(1), k = a.dim(2);
  const std::size_t m = transpose_b ? b.dim(1) : b.dim(2);
  const std::size_t bk = transpose_b ? b.dim(2) : b.dim(1);
  if (b.dim(0) != groups || bk != k) {
    shape_error("bmm", shape_to_string(a.shape()) + " x " + shape_to_string(b.shape()));
  }
  std::vector<Real> out(groups * n * m, Real(0));
  for (std::size_t g = 0; g < groups; ++g) {
    const Real* ap = a.data().data() + g * n * k;
    const Real* bp = b.data().data() + g * k * m;
    Real* cp = out.data() + g * n * m;
    if (transpose_b) {
      gemm_nt(ap, bp, cp, n, k, m);
    } else {
      gemm_nn(ap, bp, cp, n, k, m);
    }
  }
  return Tensor::from_op(
      {groups, n, m}, std::move(out), {a, b}, [groups, n, k, m, transpose_b](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        for (std::size_t g = 0; g < groups; ++g) {
          const Real* gp = self.grad.data() + g * n * m;
          const Real* ap = pa.data.data() + g * n * k;
          const Real* bp = pb.data.data() + g * k * m;
          if (pa.requires_grad) {
            Real* da = pa.ensure_grad().data() + g * n * k;
            if (transpose_b) {
              gemm_nn(gp, bp, da, n, m, k);  // dC[n,m] * B[m,k]
            } else {
              gemm_nt(gp, bp, da, n, m, k);  // dC[n,m] * B[k,m]^T
            }
          }
          if (pb.requires_grad) {
            Real* db = pb.ensure_grad().data() + g * k * m;
            if (transpose_b) {
              gemm_tn(gp, ap, db, n, m, k);  // dC^T[m,n] * A[n,k]
            } else {
              gemm_tn(ap, gp, db, n, k, m);  // A^T[k,n] * dC[n,m]
            }
          }
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    shape_error("add", shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
  std::vector<Real> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      Node& in = parent(self, p);
      if (!in.requires_grad) continue;
      auto& g = in.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    shape_error("mul", shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
  std::vector<Real> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) {
      auto& g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.data[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.data[i];
    }
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_rank("add_bias", x, 2);
  const std::size_t n = x.dim(0), m = x.dim(1);
  if (bias.numel() != m) {
    shape_error("add_bias", shape_to_string(x.shape()) + " + " + shape_to_string(bias.shape()));
  }
  std::vector<Real> out(x.data().begin(), x.data().end());
  const auto bd = bias.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bd[j];
  }
  return Tensor::from_op(x.shape(), std::move(out), {x, bias}, [n, m](Node& self) {
    Node& px = parent(self, 0);
    Node& pb = parent(self, 1);
    if (px.requires_grad) {
      auto& g = px.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) g[j] += self.grad[i * m + j];
      }
    }
  });
}

Tensor scale(const Tensor& x, Real factor) {
  std::vector<Real> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return Tensor::from_op(x.shape(), std::move(out), {x}, [factor](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor sum(const Tensor& x) {
  Real total = 0;
  for (auto v : x.data()) total += v;
  return Tensor::from_op({1}, {total}, {x}, [](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Real eps) {
  const std::size_t d = x.shape().back();
  if (gain.numel() != d || bias.numel() != d) shape_error("layer_norm", "affine size mismatch");
  const std::size_t rows = x.numel() / d;
  const auto xd = x.data();
  const auto gd = gain.data();
  const auto bd = bias.data();
  std::vector<Real> out(x.numel());
  std::vector<Real> xhat(x.numel());
  std::vector<Real> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = xd.data() + r * d;
    Real mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<Real>(d);
    Real var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<Real>(d);
    rstd[r] = Real(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const Real h = (row[j] - mean) * rstd[r];
      xhat[r * d + j] = h;
      out[r * d + j] = h * gd[j] + bd[j];
    }
  }
  return Tensor::from_op(
      x.shape(), std::move(out), {x, gain, bias},
      [rows, d, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
        Node& px = parent(self, 0);
        Node& pg = parent(self, 1);
        Node& pb = parent(self, 2);
        const Real* g = self.grad.data();
        if (pg.requires_grad || pb.requires_grad) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < d; ++j) {
              if (pg.requires_grad) pg.ensure_grad()[j] += g[r * d + j] * xhat[r * d + j];
              if (pb.requires_grad) pb.ensure_grad()[j] += g[r * d + j];
            }
          }
        }
        if (!px.requires_grad) return;
        auto& dx = px.ensure_grad();
        for (std::size_t r = 0; r < rows; ++r) {
          Real mean_dh = 0, mean_dh_h = 0;
          for (std::size_t j = 0; j < d; ++j) {
            const Real dh = g[r * d + j] * pg.data[j];
            mean_dh += dh;
            mean_dh_h += dh * xhat[r * d + j];
          }
          mean_dh /= static_cast<Real>(d);
          mean_dh_h /= static_cast<Real>(d);
          for (std::size_t j = 0; j < d; ++j) {
            const Real dh = g[r * d + j] * pg.data[j];
            dx[r * d + j] += rstd[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h);
          }
        }
      });
}

Tensor softmax(const Tensor& x) {
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.numel() / d;
  const auto xd = x.data();
  std::vector<Real> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = xd.data() + r * d;
    Real* orow = out.data() + r * d;
    const Real mx = *std::max_element(row, row + d);
    Real total = 0;
    for (std::size_t j = 0; j < d; ++j) {
      orow[j] = std::exp(row[j] - mx);
      total += orow[j];
    }
    for (std::size_t j = 0; j < d; ++j) orow[j] /= total;
  }
  auto result = Tensor::from_op(x.shape(), std::move(out), {x}, [rows, d](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const Real* y = self.data.data() + r * d;
      const Real* g = self.grad.data() + r * d;
      Real dot = 0;
      for (std::size_t j = 0; j < d; ++j) dot += y[j] * g[j];
      for (std::size_t j = 0; j < d; ++j) dx[r * d + j] += y[j] * (g[j] - dot);
    }
  });
  return result;
}

Tensor gelu(const Tensor& x) {
  const auto xd = x.data();
  std::vector<Real> out(x.numel());
  const Real inv_sqrt2 = Real(1) / std::numbers::sqrt2_v<Real>;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Real(0.5) * xd[i] * (Real(1) + std::erf(xd[i] * inv_sqrt2));
  }
  return Tensor::from_op(x.shape(), std::move(out), {x}, [inv_sqrt2](Node& self) {
    Node& px = parent(self, 0);
    auto& dx = px.ensure_grad();
    const Real inv_sqrt_2pi = inv_sqrt2 * std::numbers::inv_sqrtpi_v<Real>;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const Real v = px.data[i];
      const Real cdf = Real(0.5) * (Real(1) + std::erf(v * inv_sqrt2));
      const Real pdf = inv_sqrt_2pi * std::exp(Real(-0.5) * v * v);
      dx[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids) {
  require_rank("embedding_lookup", table, 2);
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  if (ids.empty()) shape_error("embedding_lookup", "empty id list");
  std::vector<std::int32_t> saved(ids.begin(), ids.end());
  std::vector<Real> out(ids.size() * d);
  const auto td = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw std::invalid_argument("embedding_lookup: token id " + std::to_string(ids[i]) +
                                  " outside vocabulary of size " + std::to_string(vocab));
    }
    std::copy_n(td.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  return Tensor::from_op({ids.size(), d}, std::move(out), {table},
                         [d, saved = std::move(saved)](Node& self) {
                           auto& g = parent(self, 0).ensure_grad();
                           for (std::size_t i = 0; i < saved.size(); ++i) {
                             Real* row = g.data() + static_cast<std::size_t>(saved[i]) * d;
                             for (std::size_t j = 0; j < d; ++j) row[j] += self.grad[i * d + j];
                           }
                         });
}

namespace {

Tensor apply_score_mask(const Tensor& scores, std::vector<std::uint8_t> keep) {
  std::vector<Real> out(scores.data().begin(), scores.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!keep[i]) out[i] = kMaskedScore;
  }
  return Tensor::from_op(scores.shape(), std::move(out), {scores},
                         [keep = std::move(keep)](Node& self) {
                           auto& g = parent(self, 0).ensure_grad();
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             if (keep[i]) g[i] += self.grad[i];
                           }
                         });
}

}  // namespace

Tensor causal_mask(const Tensor& scores) {
  require_rank("causal_mask", scores, 3);
  const std::size_t groups = scores.dim(0), t = scores.dim(1);
  if (scores.dim(2) != t) shape_error("causal_mask", "scores must be square per group");
  std::vector<std::uint8_t> keep(scores.numel());
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < t; ++j) keep[(g * t + i) * t + j] = j <= i;
    }
  }
  return apply_score_mask(scores, std::move(keep));
}

Tensor key_padding_mask(const Tensor& scores, std::span<const std::uint8_t> key_valid,
                        std::size_t heads) {
  require_rank("key_padding_mask", scores, 3);
  const std::size_t groups = scores.dim(0), t = scores.dim(1);
  if (heads == 0 || groups % heads != 0 || key_valid.size() != (groups / heads) * t ||
      scores.dim(2) != t) {
    shape_error("key_padding_mask", "mask does not match scores " +
                                        shape_to_string(scores.shape()));
  }
  std::vector<std::uint8_t> keep(scores.numel());
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t b = g / heads;
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < t; ++j) keep[(g * t + i) * t + j] = key_valid[b * t + j] != 0;
    }
  }
  return apply_score_mask(scores, std::move(keep));
}

Tensor split_heads(const Tensor& x, std::size_t batch, std::size_t t, std::size_t heads) {
  require_rank("split_heads", x, 2);
  const std::size_t d = x.dim(1);
  if (heads == 0 || d % heads != 0 || x.dim(0) != batch * t) {
    shape_error("split_heads", shape_to_string(x.shape()));
  }
  const std::size_t dh = d / heads;
  // out[(b*H + h), i, k] = x[b*t + i, h*dh + k]
  auto index = [=](std::size_t b, std::size_t h, std::size_t i, std::size_t k) {
    return std::pair{((b * heads + h) * t + i) * dh + k, (b * t + i) * d + h * dh + k};
  };
  std::vector<Real> out(x.numel());
  const auto xd = x.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t k = 0; k < dh; ++k) {
          auto [o, s] = index(b, h, i, k);
          out[o] = xd[s];
        }
  return Tensor::from_op({batch * heads, t, dh}, std::move(out), {x},
                         [=](Node& self) {
                           auto& g = parent(self, 0).ensure_grad();
                           for (std::size_t b = 0; b < batch; ++b)
                             for (std::size_t h = 0; h < heads; ++h)
                               for (std::size_t i = 0; i < t; ++i)
                                 for (std::size_t k = 0; k < dh; ++k) {
                                   auto [o, s] = index(b, h, i, k);
                                   g[s] += self.grad[o];
                                 }
                         });
}

Tensor merge_heads(const Tensor& x, std::size_t batch, std::size_t heads) {
  require_rank("merge_heads", x, 3);
  if (heads == 0 || x.dim(0) != batch * heads) shape_error("merge_heads", shape_to_string(x.shape()));
  const std::size_t t = x.dim(1), dh = x.dim(2), d = heads * dh;
  auto index = [=](std::size_t b, std::size_t h, std::size_t i, std::size_t k) {
    return std::pair{(b * t + i) * d + h * dh + k, ((b * heads + h) * t + i) * dh + k};
  };
  std::vector<Real> out(x.numel());
  const auto xd = x.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t k = 0; k < dh; ++k) {
          auto [o, s] = index(b, h, i, k);
          out[o] = xd[s];
        }
  return Tensor::from_op({batch * t, d}, std::move(out), {x}, [=](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < t; ++i)
          for (std::size_t k = 0; k < dh; ++k) {
            auto [o, s] = index(b, h, i, k);
            g[s] += self.grad[o];
          }
  });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  require_rank("gather_rows", x, 2);
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (indices.empty()) shape_error("gather_rows", "empty index list");
  std::vector<std::size_t> saved(indices.begin(), indices.end());
  std::vector<Real> out(indices.size() * d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= n) shape_error("gather_rows", "row index out of range");
    std::copy_n(x.data().data() + indices[i] * d, d, out.data() + i * d);
  }
  return Tensor::from_op({indices.size(), d}, std::move(out), {x},
                         [d, saved = std::move(saved)](Node& self) {
                           auto& g = parent(self, 0).ensure_grad();
                           for (std::size_t i = 0; i < saved.size(); ++i) {
                             for (std::size_t j = 0; j < d; ++j) {
                               g[saved[i] * d + j] += self.grad[i * d + j];
                             }
                           }
                         });
}

Tensor masked_mean_rows(const Tensor& x, std::span<const std::uint8_t> valid,
                        std::size_t batch) {
  require_rank("masked_mean_rows", x, 2);
  const std::size_t rows = x.dim(0), d = x.dim(1);
  if (batch == 0 || rows % batch != 0 || valid.size() != rows) {
    shape_error("masked_mean_rows", shape_to_string(x.shape()));
  }
  const std::size_t t = rows / batch;
  std::vector<Real> weight(rows, Real(0));
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < t; ++i) count += valid[b * t + i] != 0;
    if (count == 0) shape_error("masked_mean_rows", "sequence without valid positions");
    for (std::size_t i = 0; i < t; ++i) {
      if (valid[b * t + i]) weight[b * t + i] = Real(1) / static_cast<Real>(count);
    }
  }
  std::vector<Real> out(batch * d, Real(0));
  const auto xd = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    if (weight[r] == Real(0)) continue;
    for (std::size_t j = 0; j < d; ++j) out[(r / t) * d + j] += weight[r] * xd[r * d + j];
  }
  return Tensor::from_op({batch, d}, std::move(out), {x},
                         [t, d, weight = std::move(weight)](Node& self) {
                           auto& g = parent(self, 0).ensure_grad();
                           for (std::size_t r = 0; r < weight.size(); ++r) {
                             for (std::size_t j = 0; j < d; ++j) {
                               g[r * d + j] += weight[r] * self.grad[(r / t) * d + j];
                             }
                           }
                         });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_rank("cross_entropy", logits, 2);
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (labels.size() != n) shape_error("cross_entropy", "label count mismatch");
  const auto ld = logits.data();
  std::vector<Real> probs(n * c);
  Real loss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw std::invalid_argument("cross_entropy: label out of range");
    }
    const Real* row = ld.data() + i * c;
    const Real mx = *std::max_element(row, row + c);
    Real total = 0;
    for (std::size_t j = 0; j < c; ++j) total += std::exp(row[j] - mx);
    const Real log_total = std::log(total);
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - mx - log_total);
    loss -= row[labels[i]] - mx - log_total;
  }
  loss /= static_cast<Real>(n);
  std::vector<int> saved(labels.begin(), labels.end());
  return Tensor::from_op(
      {1}, {loss}, {logits},
      [n, c, probs = std::move(probs), saved = std::move(saved)](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        const Real coef = self.grad[0] / static_cast<Real>(n);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            const Real target = static_cast<int>(j) == saved[i] ? Real(1) : Real(0);
            g[i * c + j] += coef * (probs[i * c + j] - target);
          }
        }
      });
}

Tensor dropout(const Tensor& x, Real rate, const RngStream& rng, bool active) {
  if (!(rate >= Real(0) && rate < Real(1))) {
    throw std::invalid_argument("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!active || rate == Real(0)) return x;
  auto engine = rng.engine();
  const Real keep_scale = Real(1) / (Real(1) - rate);
  std::vector<Real> mask(x.numel());
  for (auto& m : mask) m = uniform01(engine) < static_cast<double>(rate) ? Real(0) : keep_scale;
  std::vector<Real> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return Tensor::from_op(x.shape(), std::move(out), {x}, [mask = std::move(mask)](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
}

}  // namespace mcdrop::ops
