#include "windgat/adjacency.hpp"

#include "windgat/errors.hpp"
#include "windgat/ops.hpp"

namespace windgat {

namespace {

void require_square(const Tensor& m, const char* what) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1)) {
    throw DimensionError(std::string(what) + " must be square, got " +
                         shape_to_string(m.shape()));
  }
}

Tensor identity(std::size_t n) {
  std::vector<double> eye(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1.0;
  return Tensor::from({n, n}, std::move(eye));
}

}  // namespace

LearnableAdjacency::LearnableAdjacency(std::size_t nodes, Rng& rng)
    : LearnableAdjacency(uniform_tensor(rng, {nodes, nodes}, 0.0, 1.0, true)) {}

LearnableAdjacency::LearnableAdjacency(Tensor raw) : raw_(std::move(raw)) {
  require_square(raw_, "adjacency");
  if (raw_.dim(0) < 2) {
    throw DimensionError("adjacency needs at least 2 nodes");
  }
}

Tensor normalize_adjacency(const Tensor& raw) {
  require_square(raw, "adjacency");
  const Tensor with_loops = ops::add(raw, identity(raw.dim(0)));
  const Tensor lo = ops::min(with_loops);
  const Tensor hi = ops::max(with_loops);
  if (!(hi.item() > lo.item())) {
    throw NumericError(
        "normalize_adjacency: A + I is constant, min-max range is zero");
  }
  return ops::div(ops::sub(with_loops, lo), ops::sub(hi, lo));
}

Tensor mixing_matrix(const Tensor& a_hat) {
  require_square(a_hat, "normalized adjacency");
  const std::size_t n = a_hat.dim(0);
  auto v = a_hat.data();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (v[i * n + j] < 0.0) {
        throw DimensionError("mixing_matrix: negative adjacency entry");
      }
      row += v[i * n + j];
    }
    if (!(row > 0.0)) {
      throw NumericError("mixing_matrix: zero degree at node " +
                         std::to_string(i));
    }
  }
  const Tensor inv_sqrt_degree = ops::pow(ops::sum(a_hat, 1), -0.5);
  const Tensor scaling = ops::matmul(ops::reshape(inv_sqrt_degree, {n, 1}),
                                     ops::reshape(inv_sqrt_degree, {1, n}));
  return ops::mul(a_hat, scaling);
}

Tensor mix_nodes(const Tensor& mixing, const Tensor& features) {
  require_square(mixing, "mixing matrix");
  if (features.rank() != 2 || features.dim(0) != mixing.dim(0)) {
    throw DimensionError("mix_nodes: mixing " + shape_to_string(mixing.shape()) +
                         " does not match features " +
                         shape_to_string(features.shape()));
  }
  return ops::matmul(mixing, features);
}

}  // namespace windgat
