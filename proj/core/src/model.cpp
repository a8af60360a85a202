#include "windgat/model.hpp"

#include "windgat/errors.hpp"
#include "windgat/ops.hpp"
#include "windgat/random.hpp"

namespace windgat {

void ModelConfig::validate() const {
  if (cities < 2) throw ConfigError("model needs at least 2 cities");
  if (timesteps == 0 || variables == 0) {
    throw ConfigError("timesteps and variables must be positive");
  }
  if (transformed_time == 0) throw ConfigError("transformed_time must be >= 1");
  if (variable_heads == 0 || scalar_heads == 0) {
    throw ConfigError("head counts must be >= 1");
  }
  if (scalar_group_width == 0) {
    throw ConfigError("scalar_group_width must be >= 1");
  }
  if (lstm_hidden == 0) throw ConfigError("lstm_hidden must be >= 1");
  if (horizon == 0) throw ConfigError("horizon must be >= 1");
}

namespace {

const ModelConfig& validated(const ModelConfig& config) {
  config.validate();
  return config;
}

std::vector<ScalarGatHead> make_scalar_heads(const ModelConfig& c, Rng& rng) {
  std::vector<ScalarGatHead> heads;
  for (std::size_t k = 0; k < c.scalar_heads; ++k) {
    heads.push_back(
        ScalarGatHead::init(rng, c.timesteps * c.variables, c.scalar_width()));
  }
  return heads;
}

std::vector<VariableGatHead> make_variable_heads(const ModelConfig& c, Rng& rng) {
  std::vector<VariableGatHead> heads;
  for (std::size_t k = 0; k < c.variable_heads; ++k) {
    heads.push_back(VariableGatHead::init(rng, c.timesteps, c.transformed_time));
  }
  return heads;
}

}  // namespace

MultistreamGatModel::MultistreamGatModel(const ModelConfig& config)
    : MultistreamGatModel(validated(config), Rng(config.seed)) {}

// Members are declared, and therefore drawn from `rng`, in parameters() order.
MultistreamGatModel::MultistreamGatModel(const ModelConfig& config, Rng rng)
    : scalar_adjacency(config.cities, rng),
      variable_adjacency(config.cities, rng),
      scalar_heads(make_scalar_heads(config, rng)),
      variable_heads(make_variable_heads(config, rng)),
      lstm(LstmLayer::init(rng, config.lstm_input(), config.lstm_hidden)),
      output_weight(glorot_uniform(rng, {config.cities, config.lstm_hidden},
                                   config.lstm_hidden, config.cities)),
      output_bias(Tensor::zeros({config.cities}, true)),
      config_(config) {}

ForwardResult MultistreamGatModel::forward(const Tensor& x) const {
  const ModelConfig& c = config_;
  const Shape expected{c.cities, c.timesteps, c.variables};
  if (x.shape() != expected) {
    throw DimensionError("forward: expected input " + shape_to_string(expected) +
                         ", got " + shape_to_string(x.shape()));
  }
  const std::size_t n = c.cities;
  const std::size_t t_out = c.transformed_time;
  ForwardResult result;

  // Scalar stream on flattened [N × T·F] node features.
  StreamOutput scalar =
      scalar_stream(scalar_heads, ops::reshape(x, {n, c.timesteps * c.variables}));
  const Tensor scalar_a_hat = normalize_adjacency(scalar_adjacency);
  const Tensor scalar_mixed =
      mix_nodes(mixing_matrix(scalar_a_hat), scalar.features);
  // [N × K·T'·g] → [T' × N·K·g]
  const Tensor scalar_seq = ops::reshape(
      ops::permute(ops::reshape(scalar_mixed,
                                {n, c.scalar_heads, t_out, c.scalar_group_width}),
                   {2, 0, 1, 3}),
      {t_out, n * c.scalar_heads * c.scalar_group_width});

  // Variable stream on [N × T × F] node features.
  StreamOutput variable = variable_stream(variable_heads, x);
  const std::size_t var_width = c.variable_heads * c.variables;
  const Tensor variable_a_hat = normalize_adjacency(variable_adjacency);
  const Tensor variable_mixed =
      mix_nodes(mixing_matrix(variable_a_hat),
                ops::reshape(variable.features, {n, t_out * var_width}));
  // [N × T' × K·F] → [T' × N·K·F]
  const Tensor variable_seq = ops::reshape(
      ops::permute(ops::reshape(variable_mixed, {n, t_out, var_width}), {1, 0, 2}),
      {t_out, n * var_width});

  const Tensor merged = ops::concat({scalar_seq, variable_seq}, 1);
  const Tensor hidden = lstm_forward(lstm, merged);
  result.prediction = ops::add(
      ops::reshape(ops::matmul(output_weight,
                               ops::reshape(hidden, {c.lstm_hidden, 1})),
                   {n}),
      output_bias);

  result.attention.scalar_adjacency = scalar_a_hat;
  result.attention.variable_adjacency = variable_a_hat;
  result.attention.scalar_alpha = std::move(scalar.attention);
  result.attention.variable_alpha = std::move(variable.attention);
  return result;
}

std::vector<NamedParameter> MultistreamGatModel::parameters() const {
  std::vector<NamedParameter> params;
  params.push_back({"adjacency.scalar", scalar_adjacency.raw()});
  params.push_back({"adjacency.variable", variable_adjacency.raw()});
  for (std::size_t k = 0; k < scalar_heads.size(); ++k) {
    const std::string prefix = "scalar_head." + std::to_string(k);
    params.push_back({prefix + ".weight", scalar_heads[k].weight});
    params.push_back({prefix + ".attention", scalar_heads[k].attention});
  }
  for (std::size_t k = 0; k < variable_heads.size(); ++k) {
    const std::string prefix = "variable_head." + std::to_string(k);
    params.push_back({prefix + ".weight", variable_heads[k].weight});
    params.push_back({prefix + ".attention", variable_heads[k].attention});
  }
  static constexpr const char* kGateNames[4] = {"i", "f", "g", "o"};
  for (std::size_t g = 0; g < 4; ++g) {
    params.push_back({std::string("lstm.input_weight.") + kGateNames[g],
                      lstm.input_weights[g]});
  }
  for (std::size_t g = 0; g < 4; ++g) {
    params.push_back({std::string("lstm.recurrent_weight.") + kGateNames[g],
                      lstm.recurrent_weights[g]});
  }
  for (std::size_t g = 0; g < 4; ++g) {
    params.push_back(
        {std::string("lstm.bias.") + kGateNames[g], lstm.biases[g]});
  }
  params.push_back({"output.weight", output_weight});
  params.push_back({"output.bias", output_bias});
  return params;
}

}  // namespace windgat
