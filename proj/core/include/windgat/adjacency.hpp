#pragma once

#include <cstddef>

#include "windgat/random.hpp"
#include "windgat/tensor.hpp"

namespace windgat {

// Trainable N×N station graph. The raw matrix is unconstrained; the
// normalized form is recomputed functionally on every forward pass.
class LearnableAdjacency {
 public:
  // Entries drawn i.i.d. from U[0, 1).
  LearnableAdjacency(std::size_t nodes, Rng& rng);
  explicit LearnableAdjacency(Tensor raw);

  std::size_t nodes() const { return raw_.dim(0); }
  const Tensor& raw() const { return raw_; }
  Tensor& raw() { return raw_; }

 private:
  Tensor raw_;
};

// Â = minmax(A + I), min and max taken over the whole matrix. Throws
// NumericError when A + I is constant.
Tensor normalize_adjacency(const Tensor& raw);
inline Tensor normalize_adjacency(const LearnableAdjacency& adj) {
  return normalize_adjacency(adj.raw());
}

// S = D^{-1/2} Â D^{-1/2} with D_ii = Σ_j Â_ij. Throws NumericError on a
// zero row sum and DimensionError on negative entries.
Tensor mixing_matrix(const Tensor& a_hat);

// H̃ = S·H: row i of the result is Σ_j S_ij H_j.
Tensor mix_nodes(const Tensor& mixing, const Tensor& features);

}  // namespace windgat
