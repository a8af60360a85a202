#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "windgat/errors.hpp"
#include "windgat/lstm.hpp"
#include "windgat/ops.hpp"

using namespace windgat;
using windgat::testing::max_abs_diff;
using windgat::testing::numeric_gradient;
using windgat::testing::random_tensor;
using windgat::testing::relative_error;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One LSTM step with plain loops.
std::pair<std::vector<double>, std::vector<double>> loop_step(
    const LstmLayer& layer, const std::vector<double>& x,
    const std::vector<double>& h, const std::vector<double>& c) {
  const std::size_t hidden = layer.hidden_size(), in = layer.input_size();
  std::array<std::vector<double>, 4> pre;
  for (std::size_t g = 0; g < 4; ++g) {
    pre[g].assign(hidden, 0.0);
    for (std::size_t r = 0; r < hidden; ++r) {
      double s = layer.biases[g].data()[r];
      for (std::size_t k = 0; k < in; ++k) s += layer.input_weights[g].at({r, k}) * x[k];
      for (std::size_t k = 0; k < hidden; ++k)
        s += layer.recurrent_weights[g].at({r, k}) * h[k];
      pre[g][r] = s;
    }
  }
  std::vector<double> h_next(hidden), c_next(hidden);
  for (std::size_t r = 0; r < hidden; ++r) {
    c_next[r] = sigmoid(pre[kForgetGate][r]) * c[r] +
                sigmoid(pre[kInputGate][r]) * std::tanh(pre[kCellGate][r]);
    h_next[r] = sigmoid(pre[kOutputGate][r]) * std::tanh(c_next[r]);
  }
  return {h_next, c_next};
}

}  // namespace

TEST_CASE("single step matches the loop reference") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const LstmLayer layer = LstmLayer::init(rng, 5, 3);
    const Tensor x = random_tensor(rng, {5}, -2, 2);
    const LstmState state{random_tensor(rng, {3}), random_tensor(rng, {3})};
    const LstmState next = lstm_step(layer, x, state);
    const auto [h, c] = loop_step(layer, x.to_vector(), state.h.to_vector(),
                                  state.c.to_vector());
    CHECK(max_abs_diff(next.h.data(), h) <= 1e-12);
    CHECK(max_abs_diff(next.c.data(), c) <= 1e-12);
  }
}

TEST_CASE("sequence run matches repeated loop steps") {
  Rng rng(2);
  const LstmLayer layer = LstmLayer::init(rng, 4, 6);
  const Tensor seq = random_tensor(rng, {7, 4}, -2, 2);
  std::vector<double> h(6, 0.0), c(6, 0.0);
  for (std::size_t t = 0; t < 7; ++t) {
    std::vector<double> x(seq.data().begin() + t * 4, seq.data().begin() + (t + 1) * 4);
    std::tie(h, c) = loop_step(layer, x, h, c);
  }
  CHECK(max_abs_diff(lstm_forward(layer, seq).data(), h) <= 1e-12);
}

TEST_CASE("zero weights and biases keep the state at zero") {
  Rng rng(3);
  LstmLayer layer = LstmLayer::init(rng, 3, 4);
  for (std::size_t g = 0; g < 4; ++g) {
    layer.input_weights[g] = Tensor::zeros({4, 3}, true);
    layer.recurrent_weights[g] = Tensor::zeros({4, 4}, true);
    layer.biases[g] = Tensor::zeros({4}, true);
  }
  const Tensor h = lstm_forward(layer, random_tensor(rng, {5, 3}, -5, 5));
  for (double v : h.data()) CHECK(v == 0.0);
}

TEST_CASE("initialisation: forget bias one, other biases zero") {
  Rng rng(4);
  const LstmLayer layer = LstmLayer::init(rng, 140, 128);
  for (std::size_t g = 0; g < 4; ++g)
    for (double b : layer.biases[g].data()) CHECK(b == (g == kForgetGate ? 1.0 : 0.0));
  CHECK(layer.input_size() == 140);
  CHECK(layer.hidden_size() == 128);
}

TEST_CASE("hidden state stays inside (-1, 1) (property)") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const LstmLayer layer = LstmLayer::init(rng, 3, 4);
    const Tensor h = lstm_forward(layer, random_tensor(rng, {1 + rng.below(12), 3}, -50, 50));
    for (double v : h.data()) CHECK(std::abs(v) < 1.0);
  }
}

TEST_CASE("shape errors") {
  Rng rng(6);
  const LstmLayer layer = LstmLayer::init(rng, 3, 2);
  CHECK_THROWS_AS(lstm_forward(layer, Tensor::zeros({4, 2})), DimensionError);
  CHECK_THROWS_AS(lstm_step(layer, Tensor::zeros({3}), zero_state(3)), DimensionError);
  CHECK_THROWS_AS(LstmLayer::init(rng, 0, 2), ConfigError);
}

TEST_CASE("backpropagation through time matches central differences") {
  Rng rng(7);
  LstmLayer layer = LstmLayer::init(rng, 3, 2);
  Tensor seq = random_tensor(rng, {4, 3}, -1, 1, true);
  const Tensor weights = random_tensor(rng, {2});
  auto loss = [&] { return ops::sum(ops::mul(lstm_forward(layer, seq), weights)); };
  std::vector<Tensor> targets{seq};
  for (std::size_t g = 0; g < 4; ++g) {
    targets.push_back(layer.input_weights[g]);
    targets.push_back(layer.recurrent_weights[g]);
    targets.push_back(layer.biases[g]);
  }
  for (Tensor& p : targets) {
    loss().backward();
    const std::vector<double> g(p.grad().begin(), p.grad().end());
    CHECK(relative_error(g, numeric_gradient(p, [&] { return loss().item(); })) < 1e-4);
  }
}
