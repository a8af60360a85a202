#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "windgat/random.hpp"
#include "windgat/tensor.hpp"

namespace windgat {

// Negative slope of the LeakyReLU applied to attention logits.
inline constexpr double kAttentionSlope = 0.2;

// Classical GAT head over flattened node features.
struct ScalarGatHead {
  Tensor weight;     // [d' × d]
  Tensor attention;  // [2d']

  static ScalarGatHead init(Rng& rng, std::size_t in_features,
                            std::size_t out_features);
  std::size_t out_features() const { return weight.dim(0); }
};

// Variable-wise GAT head. Node features are [T × F] matrices; `weight` mixes
// the time axis and attention is scored separately for each variable column.
struct VariableGatHead {
  Tensor weight;     // [T' × T]
  Tensor attention;  // [2T']

  static VariableGatHead init(Rng& rng, std::size_t timesteps,
                              std::size_t out_timesteps);
  std::size_t out_timesteps() const { return weight.dim(0); }
};

// α[i, j] = softmax_j LeakyReLU(aᵀ[W x_i ‖ W x_j]) over all N nodes.
// features: [N × d] → [N × N]
Tensor scalar_attention(const ScalarGatHead& head, const Tensor& features);

// ĥ_i = ELU(Σ_j α_ij W x_j) → [N × d']
Tensor scalar_gat_forward(const ScalarGatHead& head, const Tensor& features,
                          const Tensor& alpha);

// α[i, j, p] = softmax_j LeakyReLU(aᵀ[W H_i ‖ W H_j])_p.
// features: [N × T × F] → [N × N × F]
Tensor variable_attention(const VariableGatHead& head, const Tensor& features);

// ĥ_i = ELU(Σ_j (W H_j) diag(α_ij^1 … α_ij^F)) → [N × T' × F]
Tensor variable_gat_forward(const VariableGatHead& head, const Tensor& features,
                            const Tensor& alpha);

// Concatenates per-head outputs along `axis` in head order. All heads must
// share a shape.
Tensor multi_head(const std::vector<Tensor>& head_outputs, std::size_t axis);

struct StreamOutput {
  Tensor features;                // concatenated head outputs
  std::vector<Tensor> attention;  // one α per head
};

// Scalar stream: [N × d] → [N × K·d'].
StreamOutput scalar_stream(std::span<const ScalarGatHead> heads,
                           const Tensor& features);
// Variable stream: [N × T × F] → [N × T' × K·F].
StreamOutput variable_stream(std::span<const VariableGatHead> heads,
                             const Tensor& features);

}  // namespace windgat
