#include "windgat/lstm.hpp"

#include "windgat/errors.hpp"
#include "windgat/ops.hpp"

namespace windgat {

namespace {

Tensor affine(const Tensor& weight, const Tensor& v) {
  const std::size_t rows = weight.dim(0);
  return ops::reshape(ops::matmul(weight, ops::reshape(v, {v.numel(), 1})),
                      {rows});
}

}  // namespace

LstmLayer LstmLayer::init(Rng& rng, std::size_t input_size,
                          std::size_t hidden_size) {
  if (input_size == 0 || hidden_size == 0) {
    throw ConfigError("LSTM sizes must be positive");
  }
  LstmLayer layer;
  for (std::size_t g = 0; g < 4; ++g) {
    layer.input_weights[g] =
        glorot_uniform(rng, {hidden_size, input_size}, input_size, hidden_size);
    layer.recurrent_weights[g] =
        glorot_uniform(rng, {hidden_size, hidden_size}, hidden_size, hidden_size);
    layer.biases[g] =
        Tensor::full({hidden_size}, g == kForgetGate ? 1.0 : 0.0, true);
  }
  return layer;
}

LstmState zero_state(std::size_t hidden_size) {
  return {Tensor::zeros({hidden_size}), Tensor::zeros({hidden_size})};
}

LstmState lstm_step(const LstmLayer& layer, const Tensor& x,
                    const LstmState& state) {
  const std::size_t hidden = layer.hidden_size();
  if (x.numel() != layer.input_size()) {
    throw DimensionError("lstm_step: input " + shape_to_string(x.shape()) +
                         " does not match input size " +
                         std::to_string(layer.input_size()));
  }
  if (state.h.numel() != hidden || state.c.numel() != hidden) {
    throw DimensionError("lstm_step: state does not match hidden size " +
                         std::to_string(hidden));
  }
  std::array<Tensor, 4> pre;
  for (std::size_t g = 0; g < 4; ++g) {
    pre[g] = ops::add(ops::add(affine(layer.input_weights[g], x),
                               affine(layer.recurrent_weights[g], state.h)),
                      layer.biases[g]);
  }
  const Tensor in = ops::sigmoid(pre[kInputGate]);
  const Tensor forget = ops::sigmoid(pre[kForgetGate]);
  const Tensor cell = ops::tanh(pre[kCellGate]);
  const Tensor out = ops::sigmoid(pre[kOutputGate]);
  const Tensor c = ops::add(ops::mul(forget, ops::reshape(state.c, {hidden})),
                            ops::mul(in, cell));
  return {ops::mul(out, ops::tanh(c)), c};
}

Tensor lstm_forward(const LstmLayer& layer, const Tensor& sequence) {
  if (sequence.rank() != 2 || sequence.dim(1) != layer.input_size()) {
    throw DimensionError("lstm_forward: expected [T' x " +
                         std::to_string(layer.input_size()) + "], got " +
                         shape_to_string(sequence.shape()));
  }
  LstmState state = zero_state(layer.hidden_size());
  for (std::size_t t = 0; t < sequence.dim(0); ++t) {
    state = lstm_step(layer, ops::slice(sequence, 0, t, t + 1), state);
  }
  return state.h;
}

}  // namespace windgat
