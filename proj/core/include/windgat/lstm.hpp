#pragma once

#include <array>
#include <cstddef>

#include "windgat/random.hpp"
#include "windgat/tensor.hpp"

namespace windgat {

// Gate order used for every per-gate array below.
enum Gate : std::size_t { kInputGate = 0, kForgetGate, kCellGate, kOutputGate };

// Single-layer LSTM:
//   i = σ(W_i x + U_i h + b_i)   f = σ(W_f x + U_f h + b_f)
//   g = tanh(W_g x + U_g h + b_g) o = σ(W_o x + U_o h + b_o)
//   c' = f ⊙ c + i ⊙ g           h' = o ⊙ tanh(c')
struct LstmLayer {
  std::array<Tensor, 4> input_weights;      // [hidden × input]
  std::array<Tensor, 4> recurrent_weights;  // [hidden × hidden]
  std::array<Tensor, 4> biases;             // [hidden]

  // Glorot-uniform weights, forget bias 1, remaining biases 0.
  static LstmLayer init(Rng& rng, std::size_t input_size,
                        std::size_t hidden_size);

  std::size_t input_size() const { return input_weights[0].dim(1); }
  std::size_t hidden_size() const { return input_weights[0].dim(0); }
};

struct LstmState {
  Tensor h;  // [hidden]
  Tensor c;  // [hidden]
};

LstmState zero_state(std::size_t hidden_size);

LstmState lstm_step(const LstmLayer& layer, const Tensor& x,
                    const LstmState& state);

// Runs the sequence [T' × input] from a zero state and returns h_{T'}.
Tensor lstm_forward(const LstmLayer& layer, const Tensor& sequence);

}  // namespace windgat
