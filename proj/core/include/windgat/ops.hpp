#pragma once

#include <cstddef>
#include <vector>

#include "windgat/tensor.hpp"

// Differentiable tensor operations. Every op checks its output for NaN/Inf
// and throws NumericError naming the op.
namespace windgat::ops {

// [m×k]·[k×n] → [m×n]
Tensor matmul(const Tensor& a, const Tensor& b);
// [B×m×k]·[B×k×n] → [B×m×n]
Tensor batched_matmul(const Tensor& a, const Tensor& b);

// Binary elementwise ops. Supported operand pairs: identical shapes, either
// side holding a single element, or `b` a vector matching the last axis of
// `a` (bias add).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor pow(const Tensor& x, double exponent);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor elu(const Tensor& x, double alpha = 1.0);
Tensor leaky_relu(const Tensor& x, double slope);

// Numerically stable softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);
Tensor transpose(const Tensor& x);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin,
             std::size_t end);

Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x);
// Global reductions; ties resolve to the first occurrence in row-major order.
Tensor max(const Tensor& x);
Tensor min(const Tensor& x);

// out[i, j, p] = a[i, p] + b[j, p] for a, b of shape [N×F] → [N×N×F].
Tensor outer_sum(const Tensor& a, const Tensor& b);

}  // namespace windgat::ops
