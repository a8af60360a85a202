#include "windgat/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "windgat/errors.hpp"

namespace windgat::ops {

namespace {

using detail::Node;

std::string shapes(const Tensor& a, const Tensor& b) {
  return shape_to_string(a.shape()) + " and " + shape_to_string(b.shape());
}

// Gradient buffer of parent `i`, or nullptr if it takes no gradient.
double* grad_of(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad && !p.grad.empty() ? p.grad.data() : nullptr;
}

const std::vector<double>& data_of(Node& self, std::size_t i) {
  return self.parents[i]->data;
}

Tensor make_result(const char* op, Shape shape, std::vector<double> data,
                   const std::vector<Tensor>& inputs,
                   std::function<void(Node&)> backward) {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  bool track = grad_enabled() && std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
  if (track) {
    node->requires_grad = true;
    for (const Tensor& t : inputs) node->parents.push_back(t.node());
    node->backward = std::move(backward);
  }
  return Tensor::from_node(std::move(node));
}

template <typename Fn, typename Dfn>
Tensor unary(const char* op, const Tensor& x, Fn f, Dfn df) {
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(in[k]);
  return make_result(op, x.shape(), std::move(out), {x}, [df](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& xin = data_of(self, 0);
    for (std::size_t k = 0; k < self.grad.size(); ++k) {
      gx[k] += self.grad[k] * df(xin[k], self.data[k]);
    }
  });
}

enum class Broadcast { kSame, kScalarRhs, kScalarLhs, kBiasRhs };

Broadcast broadcast_mode(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.numel() == 1) return Broadcast::kScalarRhs;
  if (a.numel() == 1) return Broadcast::kScalarLhs;
  if (b.rank() == 1 && a.rank() >= 1 && a.shape().back() == b.dim(0)) {
    return Broadcast::kBiasRhs;
  }
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       shapes(a, b));
}

// Partial derivatives of f(a, b) are returned as a pair.
template <typename Fn, typename Dfn>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, Fn f, Dfn df) {
  Broadcast mode = broadcast_mode(op, a, b);
  Shape out_shape = mode == Broadcast::kScalarLhs ? b.shape() : a.shape();
  std::size_t n = shape_numel(out_shape);
  std::size_t bias_len = mode == Broadcast::kBiasRhs ? b.numel() : 1;
  auto ia = [mode](std::size_t k) {
    return mode == Broadcast::kScalarLhs ? std::size_t{0} : k;
  };
  auto ib = [mode, bias_len](std::size_t k) {
    switch (mode) {
      case Broadcast::kScalarRhs: return std::size_t{0};
      case Broadcast::kBiasRhs: return k % bias_len;
      default: return k;
    }
  };
  std::vector<double> out(n);
  auto da = a.data();
  auto db = b.data();
  for (std::size_t k = 0; k < n; ++k) out[k] = f(da[ia(k)], db[ib(k)]);
  return make_result(op, std::move(out_shape), std::move(out), {a, b},
                     [df, ia, ib](Node& self) {
                       double* ga = grad_of(self, 0);
                       double* gb = grad_of(self, 1);
                       const auto& av = data_of(self, 0);
                       const auto& bv = data_of(self, 1);
                       for (std::size_t k = 0; k < self.grad.size(); ++k) {
                         auto [pa, pb] = df(av[ia(k)], bv[ib(k)]);
                         if (ga) ga[ia(k)] += self.grad[k] * pa;
                         if (gb) gb[ib(k)] += self.grad[k] * pb;
                       }
                     });
}

void check_axis(const char* op, const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for shape " +
                         shape_to_string(x.shape()));
  }
}

// Splits a shape around `axis` into (outer, extent, inner) element counts.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Tensor extremum(const char* op, const Tensor& x, bool want_max) {
  auto v = x.data();
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (want_max ? v[k] > v[best] : v[k] < v[best]) best = k;
  }
  return make_result(op, {1}, {v[best]}, {x}, [best](Node& self) {
    if (double* gx = grad_of(self, 0)) gx[best] += self.grad[0];
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shapes(a, b));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      const double aik = av[i * k + r];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aik * bv[r * n + j];
    }
  }
  return make_result("matmul", {m, n}, std::move(out), {a, b},
                     [m, k, n](Node& self) {
                       const auto& g = self.grad;
                       const auto& av = data_of(self, 0);
                       const auto& bv = data_of(self, 1);
                       if (double* ga = grad_of(self, 0)) {
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t r = 0; r < k; ++r) {
                             double acc = 0.0;
                             for (std::size_t j = 0; j < n; ++j)
                               acc += g[i * n + j] * bv[r * n + j];
                             ga[i * k + r] += acc;
                           }
                       }
                       if (double* gb = grad_of(self, 1)) {
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t r = 0; r < k; ++r) {
                             const double aik = av[i * k + r];
                             for (std::size_t j = 0; j < n; ++j)
                               gb[r * n + j] += aik * g[i * n + j];
                           }
                       }
                     });
}

Tensor batched_matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0) ||
      a.dim(2) != b.dim(1)) {
    throw DimensionError("batched_matmul: cannot multiply " + shapes(a, b));
  }
  const std::size_t batch = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
  std::vector<double> out(batch * m * n, 0.0);
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t s = 0; s < batch; ++s) {
    const double* A = av.data() + s * m * k;
    const double* B = bv.data() + s * k * n;
    double* C = out.data() + s * m * n;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t r = 0; r < k; ++r) {
        const double aik = A[i * k + r];
        for (std::size_t j = 0; j < n; ++j) C[i * n + j] += aik * B[r * n + j];
      }
  }
  return make_result(
      "batched_matmul", {batch, m, n}, std::move(out), {a, b},
      [batch, m, k, n](Node& self) {
        double* ga = grad_of(self, 0);
        double* gb = grad_of(self, 1);
        const auto& av = data_of(self, 0);
        const auto& bv = data_of(self, 1);
        for (std::size_t s = 0; s < batch; ++s) {
          const double* G = self.grad.data() + s * m * n;
          const double* A = av.data() + s * m * k;
          const double* B = bv.data() + s * k * n;
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t r = 0; r < k; ++r) {
              if (ga) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += G[i * n + j] * B[r * n + j];
                ga[s * m * k + i * k + r] += acc;
              }
              if (gb) {
                const double aik = A[i * k + r];
                for (std::size_t j = 0; j < n; ++j)
                  gb[s * k * n + r * n + j] += aik * G[i * n + j];
              }
            }
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return std::pair{1.0, 1.0}; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return std::pair{1.0, -1.0}; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double x, double y) { return std::pair{y, x}; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double x, double y) { return std::pair{1.0 / y, -x / (y * y)}; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      "add_scalar", x, [value](double v) { return v + value; },
      [](double, double) { return 1.0; });
}

Tensor pow(const Tensor& x, double exponent) {
  return unary(
      "pow", x, [exponent](double v) { return std::pow(v, exponent); },
      [exponent](double v, double) {
        return exponent * std::pow(v, exponent - 1.0);
      });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor elu(const Tensor& x, double alpha) {
  return unary(
      "elu", x,
      [alpha](double v) { return v > 0 ? v : alpha * std::expm1(v); },
      [alpha](double v, double y) { return v > 0 ? 1.0 : y + alpha; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw DimensionError("leaky_relu: slope must lie in (0, 1)");
  }
  return unary(
      "leaky_relu", x, [slope](double v) { return v >= 0 ? v : slope * v; },
      [slope](double v, double) { return v >= 0 ? 1.0 : slope; });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  check_axis("softmax", x, axis);
  const AxisSplit s = split_at(x.shape(), axis);
  auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double hi = in[base];
      for (std::size_t l = 1; l < s.extent; ++l)
        hi = std::max(hi, in[base + l * s.inner]);
      double total = 0.0;
      for (std::size_t l = 0; l < s.extent; ++l) {
        const double e = std::exp(in[base + l * s.inner] - hi);
        out[base + l * s.inner] = e;
        total += e;
      }
      for (std::size_t l = 0; l < s.extent; ++l) out[base + l * s.inner] /= total;
    }
  }
  return make_result("softmax", x.shape(), std::move(out), {x}, [s](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& y = self.data;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.extent * s.inner + i;
        double dot = 0.0;
        for (std::size_t l = 0; l < s.extent; ++l) {
          const std::size_t k = base + l * s.inner;
          dot += g[k] * y[k];
        }
        for (std::size_t l = 0; l < s.extent; ++l) {
          const std::size_t k = base + l * s.inner;
          gx[k] += y[k] * (g[k] - dot);
        }
      }
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no operands");
  const Tensor& first = parts.front();
  check_axis("concat", first, axis);
  Shape out_shape = first.shape();
  out_shape[axis] = 0;
  std::vector<std::size_t> extents;
  for (const Tensor& p : parts) {
    bool ok = p.rank() == first.rank();
    for (std::size_t d = 0; ok && d < p.rank(); ++d) {
      if (d != axis && p.dim(d) != first.dim(d)) ok = false;
    }
    if (!ok) {
      throw DimensionError("concat: incompatible shapes " + shapes(first, p) +
                           " along axis " + std::to_string(axis));
    }
    extents.push_back(p.dim(axis));
    out_shape[axis] += p.dim(axis);
  }
  const AxisSplit s = split_at(out_shape, axis);
  std::vector<double> out(shape_numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t idx = 0; idx < parts.size(); ++idx) {
    auto in = parts[idx].data();
    const std::size_t len = extents[idx];
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(in.data() + o * len * s.inner, len * s.inner,
                  out.data() + (o * s.extent + offset) * s.inner);
    }
    offset += len;
  }
  return make_result("concat", std::move(out_shape), std::move(out), parts,
                     [s, extents](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t idx = 0; idx < extents.size(); ++idx) {
                         const std::size_t len = extents[idx];
                         if (double* gp = grad_of(self, idx)) {
                           for (std::size_t o = 0; o < s.outer; ++o) {
                             const double* src =
                                 self.grad.data() + (o * s.extent + offset) * s.inner;
                             double* dst = gp + o * len * s.inner;
                             for (std::size_t k = 0; k < len * s.inner; ++k)
                               dst[k] += src[k];
                           }
                         }
                         offset += len;
                       }
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) +
                         " as " + shape_to_string(shape));
  }
  return make_result("reshape", std::move(shape), x.to_vector(), {x},
                     [](Node& self) {
                       double* gx = grad_of(self, 0);
                       if (!gx) return;
                       for (std::size_t k = 0; k < self.grad.size(); ++k)
                         gx[k] += self.grad[k];
                     });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  const std::size_t rank = x.rank();
  std::vector<bool> used(rank, false);
  if (axes.size() != rank) {
    throw DimensionError("permute: axis list does not match rank of " +
                         shape_to_string(x.shape()));
  }
  for (std::size_t a : axes) {
    if (a >= rank || used[a]) {
      throw DimensionError("permute: invalid axis order for " +
                           shape_to_string(x.shape()));
    }
    used[a] = true;
  }
  Shape out_shape(rank);
  for (std::size_t d = 0; d < rank; ++d) out_shape[d] = x.dim(axes[d]);

  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t d = rank; d-- > 1;) in_strides[d - 1] = in_strides[d] * x.dim(d);
  // Source offset for each output element, in output order.
  std::vector<std::size_t> source(x.numel());
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t k = 0; k < source.size(); ++k) {
    std::size_t off = 0;
    for (std::size_t d = 0; d < rank; ++d) off += idx[d] * in_strides[axes[d]];
    source[k] = off;
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < out_shape[d]) break;
      idx[d] = 0;
    }
  }
  auto in = x.data();
  std::vector<double> out(source.size());
  for (std::size_t k = 0; k < source.size(); ++k) out[k] = in[source[k]];
  return make_result("permute", std::move(out_shape), std::move(out), {x},
                     [source = std::move(source)](Node& self) {
                       double* gx = grad_of(self, 0);
                       if (!gx) return;
                       for (std::size_t k = 0; k < source.size(); ++k)
                         gx[source[k]] += self.grad[k];
                     });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) {
    throw DimensionError("transpose: expected a matrix, got " +
                         shape_to_string(x.shape()));
  }
  return permute(x, {1, 0});
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin,
             std::size_t end) {
  check_axis("slice", x, axis);
  if (begin >= end || end > x.dim(axis)) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for axis " +
                         std::to_string(axis) + " of " +
                         shape_to_string(x.shape()));
  }
  const AxisSplit s = split_at(x.shape(), axis);
  const std::size_t len = end - begin;
  Shape out_shape = x.shape();
  out_shape[axis] = len;
  auto in = x.data();
  std::vector<double> out(s.outer * len * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(in.data() + (o * s.extent + begin) * s.inner, len * s.inner,
                out.data() + o * len * s.inner);
  }
  return make_result("slice", std::move(out_shape), std::move(out), {x},
                     [s, begin, len](Node& self) {
                       double* gx = grad_of(self, 0);
                       if (!gx) return;
                       for (std::size_t o = 0; o < s.outer; ++o) {
                         const double* src = self.grad.data() + o * len * s.inner;
                         double* dst = gx + (o * s.extent + begin) * s.inner;
                         for (std::size_t k = 0; k < len * s.inner; ++k)
                           dst[k] += src[k];
                       }
                     });
}

Tensor sum(const Tensor& x) {
  auto v = x.data();
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  return make_result("sum", {1}, {total}, {x}, [](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    const std::size_t n = self.parents[0]->data.size();
    for (std::size_t k = 0; k < n; ++k) gx[k] += self.grad[0];
  });
}

Tensor sum(const Tensor& x, std::size_t axis) {
  check_axis("sum", x, axis);
  const AxisSplit s = split_at(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (out_shape.empty()) out_shape = {1};
  auto in = x.data();
  std::vector<double> out(s.outer * s.inner, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t l = 0; l < s.extent; ++l)
      for (std::size_t i = 0; i < s.inner; ++i)
        out[o * s.inner + i] += in[(o * s.extent + l) * s.inner + i];
  return make_result("sum_axis", std::move(out_shape), std::move(out), {x},
                     [s](Node& self) {
                       double* gx = grad_of(self, 0);
                       if (!gx) return;
                       for (std::size_t o = 0; o < s.outer; ++o)
                         for (std::size_t l = 0; l < s.extent; ++l)
                           for (std::size_t i = 0; i < s.inner; ++i)
                             gx[(o * s.extent + l) * s.inner + i] +=
                                 self.grad[o * s.inner + i];
                     });
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor max(const Tensor& x) { return extremum("max", x, true); }

Tensor min(const Tensor& x) { return extremum("min", x, false); }

Tensor outer_sum(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw DimensionError("outer_sum: expected two equal [N x F] operands, got " +
                         shapes(a, b));
  }
  const std::size_t n = a.dim(0), f = a.dim(1);
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(n * n * f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < f; ++p)
        out[(i * n + j) * f + p] = av[i * f + p] + bv[j * f + p];
  return make_result("outer_sum", {n, n, f}, std::move(out), {a, b},
                     [n, f](Node& self) {
                       double* ga = grad_of(self, 0);
                       double* gb = grad_of(self, 1);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t j = 0; j < n; ++j)
                           for (std::size_t p = 0; p < f; ++p) {
                             const double g = self.grad[(i * n + j) * f + p];
                             if (ga) ga[i * f + p] += g;
                             if (gb) gb[j * f + p] += g;
                           }
                     });
}

}  // namespace windgat::ops
