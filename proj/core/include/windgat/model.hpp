#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "windgat/adjacency.hpp"
#include "windgat/gat.hpp"
#include "windgat/lstm.hpp"
#include "windgat/tensor.hpp"

namespace windgat {

struct ModelConfig {
  std::size_t cities = 0;
  std::size_t timesteps = 30;
  std::size_t variables = 0;
  std::size_t transformed_time = 10;  // T'
  std::size_t variable_heads = 2;
  std::size_t scalar_heads = 2;
  // Per-timestep width g of the scalar stream; each scalar head emits
  // d' = T'·g features so its output can be laid out as [T' × g].
  std::size_t scalar_group_width = 4;
  std::size_t lstm_hidden = 128;
  std::size_t horizon = 2;
  std::uint64_t seed = 0;

  std::size_t scalar_width() const { return transformed_time * scalar_group_width; }
  std::size_t lstm_input() const {
    return cities * (scalar_heads * scalar_group_width + variable_heads * variables);
  }
  // Throws ConfigError on any zero extent or fewer than two cities.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// Attention weights and normalized adjacencies seen during one forward pass.
struct AttentionCapture {
  Tensor scalar_adjacency;               // Â, [N × N]
  Tensor variable_adjacency;             // Â, [N × N]
  std::vector<Tensor> scalar_alpha;      // per head, [N × N]
  std::vector<Tensor> variable_alpha;    // per head, [N × N × F]
};

struct ForwardResult {
  Tensor prediction;  // [N], normalized scale
  AttentionCapture attention;
};

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

// Two GAT streams (scalar and variable-wise), each followed by its own
// learnable-adjacency node mixing, merged along the feature axis and fed to a
// single-layer LSTM with an affine head producing one value per city.
class MultistreamGatModel {
 public:
  // Parameters are drawn from config.seed.
  explicit MultistreamGatModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // x: [N × T × F] normalized window.
  ForwardResult forward(const Tensor& x) const;

  // Stable order: adjacencies (scalar, variable), scalar heads (W, a) per
  // head, variable heads (W, a) per head, LSTM input weights, recurrent
  // weights and biases (gate order i, f, g, o), output weight and bias.
  std::vector<NamedParameter> parameters() const;

  LearnableAdjacency scalar_adjacency;
  LearnableAdjacency variable_adjacency;
  std::vector<ScalarGatHead> scalar_heads;
  std::vector<VariableGatHead> variable_heads;
  LstmLayer lstm;
  Tensor output_weight;  // [N × hidden]
  Tensor output_bias;    // [N]

 private:
  MultistreamGatModel(const ModelConfig& config, Rng rng);

  ModelConfig config_;
};

}  // namespace windgat
