#include "windgat/gat.hpp"

#include "windgat/errors.hpp"
#include "windgat/ops.hpp"

namespace windgat {

namespace {

void require_nodes(const Tensor& features, std::size_t rank, const char* op) {
  if (features.rank() != rank || features.dim(0) < 2) {
    throw DimensionError(std::string(op) + ": expected rank-" +
                         std::to_string(rank) +
                         " node features with N >= 2, got " +
                         shape_to_string(features.shape()));
  }
}

// Splits a [2k] attention vector into its source and neighbour halves, each
// returned as a [k × 1] column.
std::pair<Tensor, Tensor> attention_halves(const Tensor& attention,
                                           std::size_t width) {
  if (attention.rank() != 1 || attention.dim(0) != 2 * width) {
    throw DimensionError("attention vector must have shape [" +
                         std::to_string(2 * width) + "], got " +
                         shape_to_string(attention.shape()));
  }
  return {ops::reshape(ops::slice(attention, 0, 0, width), {width, 1}),
          ops::reshape(ops::slice(attention, 0, width, 2 * width), {width, 1})};
}

Tensor transform_flat(const ScalarGatHead& head, const Tensor& features) {
  require_nodes(features, 2, "scalar GAT");
  if (head.weight.rank() != 2 || head.weight.dim(1) != features.dim(1)) {
    throw DimensionError("scalar GAT: weight " +
                         shape_to_string(head.weight.shape()) +
                         " does not accept features " +
                         shape_to_string(features.shape()));
  }
  return ops::matmul(features, ops::transpose(head.weight));  // [N × d']
}

// W H_i for every node, laid out as [T' × (N·F)].
Tensor transform_time_wide(const VariableGatHead& head, const Tensor& features) {
  require_nodes(features, 3, "variable GAT");
  const std::size_t n = features.dim(0), t = features.dim(1), f = features.dim(2);
  if (head.weight.rank() != 2 || head.weight.dim(1) != t) {
    throw DimensionError("variable GAT: weight " +
                         shape_to_string(head.weight.shape()) +
                         " does not accept features " +
                         shape_to_string(features.shape()));
  }
  const Tensor time_major =
      ops::reshape(ops::permute(features, {1, 0, 2}), {t, n * f});
  return ops::matmul(head.weight, time_major);
}

}  // namespace

ScalarGatHead ScalarGatHead::init(Rng& rng, std::size_t in_features,
                                  std::size_t out_features) {
  if (in_features == 0 || out_features == 0) {
    throw ConfigError("scalar GAT head needs positive widths");
  }
  ScalarGatHead head;
  head.weight = glorot_uniform(rng, {out_features, in_features}, in_features,
                               out_features);
  head.attention = glorot_uniform(rng, {2 * out_features}, 2 * out_features, 1);
  return head;
}

VariableGatHead VariableGatHead::init(Rng& rng, std::size_t timesteps,
                                      std::size_t out_timesteps) {
  if (timesteps == 0 || out_timesteps == 0) {
    throw ConfigError("variable GAT head needs positive widths");
  }
  VariableGatHead head;
  head.weight =
      glorot_uniform(rng, {out_timesteps, timesteps}, timesteps, out_timesteps);
  head.attention =
      glorot_uniform(rng, {2 * out_timesteps}, 2 * out_timesteps, 1);
  return head;
}

Tensor scalar_attention(const ScalarGatHead& head, const Tensor& features) {
  const Tensor z = transform_flat(head, features);
  const std::size_t n = z.dim(0);
  auto [src, dst] = attention_halves(head.attention, z.dim(1));
  const Tensor logits = ops::reshape(
      ops::outer_sum(ops::matmul(z, src), ops::matmul(z, dst)), {n, n});
  return ops::softmax(ops::leaky_relu(logits, kAttentionSlope), 1);
}

Tensor scalar_gat_forward(const ScalarGatHead& head, const Tensor& features,
                          const Tensor& alpha) {
  const Tensor z = transform_flat(head, features);
  const std::size_t n = z.dim(0);
  if (alpha.shape() != Shape{n, n}) {
    throw DimensionError("scalar GAT: attention " +
                         shape_to_string(alpha.shape()) + " does not match " +
                         std::to_string(n) + " nodes");
  }
  return ops::elu(ops::matmul(alpha, z));
}

Tensor variable_attention(const VariableGatHead& head, const Tensor& features) {
  const Tensor wide = transform_time_wide(head, features);
  const std::size_t n = features.dim(0), f = features.dim(2);
  auto [src, dst] = attention_halves(head.attention, wide.dim(0));
  // aᵀ·(W H) per node and variable: [1 × N·F] → [N × F].
  const Tensor src_score =
      ops::reshape(ops::matmul(ops::transpose(src), wide), {n, f});
  const Tensor dst_score =
      ops::reshape(ops::matmul(ops::transpose(dst), wide), {n, f});
  const Tensor logits = ops::outer_sum(src_score, dst_score);  // [N × N × F]
  return ops::softmax(ops::leaky_relu(logits, kAttentionSlope), 1);
}

Tensor variable_gat_forward(const VariableGatHead& head, const Tensor& features,
                            const Tensor& alpha) {
  const Tensor wide = transform_time_wide(head, features);
  const std::size_t n = features.dim(0), f = features.dim(2);
  const std::size_t t_out = wide.dim(0);
  if (alpha.shape() != Shape{n, n, f}) {
    throw DimensionError("variable GAT: attention " +
                         shape_to_string(alpha.shape()) +
                         " does not match features " +
                         shape_to_string(features.shape()));
  }
  // [F × N × T'] (variable, node j, time) and [F × N × N] (variable, i, j).
  const Tensor z = ops::permute(ops::reshape(wide, {t_out, n, f}), {2, 1, 0});
  const Tensor a = ops::permute(alpha, {2, 0, 1});
  const Tensor mixed = ops::batched_matmul(a, z);  // [F × N × T']
  return ops::elu(ops::permute(mixed, {1, 2, 0}));
}

Tensor multi_head(const std::vector<Tensor>& head_outputs, std::size_t axis) {
  if (head_outputs.empty()) {
    throw DimensionError("multi_head: at least one head is required");
  }
  for (const Tensor& out : head_outputs) {
    if (out.shape() != head_outputs.front().shape()) {
      throw DimensionError("multi_head: heterogeneous head shapes " +
                           shape_to_string(head_outputs.front().shape()) +
                           " and " + shape_to_string(out.shape()));
    }
  }
  if (head_outputs.size() == 1) return head_outputs.front();
  return ops::concat(head_outputs, axis);
}

StreamOutput scalar_stream(std::span<const ScalarGatHead> heads,
                           const Tensor& features) {
  StreamOutput result;
  std::vector<Tensor> outputs;
  for (const ScalarGatHead& head : heads) {
    Tensor alpha = scalar_attention(head, features);
    outputs.push_back(scalar_gat_forward(head, features, alpha));
    result.attention.push_back(std::move(alpha));
  }
  result.features = multi_head(outputs, 1);
  return result;
}

StreamOutput variable_stream(std::span<const VariableGatHead> heads,
                             const Tensor& features) {
  StreamOutput result;
  std::vector<Tensor> outputs;
  for (const VariableGatHead& head : heads) {
    Tensor alpha = variable_attention(head, features);
    outputs.push_back(variable_gat_forward(head, features, alpha));
    result.attention.push_back(std::move(alpha));
  }
  result.features = multi_head(outputs, 2);
  return result;
}

}  // namespace windgat
