#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "windgat/errors.hpp"
#include "windgat/ops.hpp"
#include "windgat/training.hpp"

using namespace windgat;
using windgat::testing::random_tensor;

namespace {

ModelConfig tiny_model(std::uint64_t seed = 3) {
  ModelConfig c;
  c.cities = 3;
  c.timesteps = 4;
  c.variables = 2;
  c.transformed_time = 2;
  c.variable_heads = 1;
  c.scalar_heads = 1;
  c.scalar_group_width = 1;
  c.lstm_hidden = 4;
  c.seed = seed;
  return c;
}

std::vector<WeatherInstance> make_instances(std::size_t count, std::uint64_t seed,
                                            double target_scale = 1.0) {
  Rng rng(seed);
  std::vector<WeatherInstance> out;
  for (std::size_t k = 0; k < count; ++k) {
    WeatherInstance inst;
    inst.x = random_tensor(rng, {3, 4, 2}, 0, 1);
    std::vector<double> y(3);
    for (std::size_t c = 0; c < 3; ++c)
      y[c] = target_scale * (0.7 * inst.x.at({c, 3, 0}) + 0.3 * inst.x.at({c, 2, 1}));
    inst.y = Tensor::from({3}, y);
    out.push_back(inst);
  }
  return out;
}

std::vector<std::vector<double>> parameter_values(const MultistreamGatModel& m) {
  std::vector<std::vector<double>> v;
  for (const auto& p : m.parameters()) v.push_back(p.tensor.to_vector());
  return v;
}

}  // namespace

TEST_CASE("mse loss examples and shape check") {
  CHECK(mse_loss(Tensor::from({2}, {1, 2}), Tensor::from({2}, {1, 2})).item() == 0.0);
  CHECK(mse_loss(Tensor::from({2}, {0, 0}), Tensor::from({2}, {1, 3})).item() == 5.0);
  CHECK_THROWS_AS(mse_loss(Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
}

TEST_CASE("first Adam step moves each weight by about the learning rate") {
  std::vector<Tensor> params{Tensor::from({3}, {1.0, -2.0, 0.5}, true)};
  ops::sum(ops::mul(params[0], Tensor::from({3}, {2.0, -0.3, 40.0}))).backward();
  OptimizerState state = OptimizerState::for_parameters(params);
  TrainConfig config;
  config.learning_rate = 0.1;
  adam_step(params, state, config);
  CHECK(params[0].data()[0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(params[0].data()[1] == doctest::Approx(-1.9).epsilon(1e-7));
  CHECK(params[0].data()[2] == doctest::Approx(0.4).epsilon(1e-7));
  CHECK(state.step == 1);
}

TEST_CASE("zero gradients leave parameters unchanged") {
  std::vector<Tensor> params{Tensor::from({2}, {1.0, 2.0}, true)};
  ops::sum(ops::scale(params[0], 0.0)).backward();
  OptimizerState state = OptimizerState::for_parameters(params);
  adam_step(params, state, TrainConfig{});
  CHECK(params[0].to_vector() == std::vector<double>{1.0, 2.0});
}

TEST_CASE("a non-finite gradient aborts the step without touching parameters") {
  std::vector<Tensor> params{Tensor::from({2}, {1.0, 2.0}, true),
                             Tensor::from({1}, {3.0}, true)};
  ops::sum(ops::add(ops::sum(params[0]), params[1])).backward();
  params[1].mutable_grad()[0] = std::nan("");
  OptimizerState state = OptimizerState::for_parameters(params);
  CHECK_THROWS_AS(adam_step(params, state, TrainConfig{}), NumericError);
  CHECK(params[0].to_vector() == std::vector<double>{1.0, 2.0});
  CHECK(state.step == 0);
}

TEST_CASE("gradient clipping rescales to the target norm") {
  std::vector<Tensor> params{Tensor::from({1}, {0.0}, true), Tensor::from({1}, {0.0}, true)};
  ops::sum(ops::add(ops::scale(params[0], 3.0), ops::scale(params[1], 4.0))).backward();
  CHECK(clip_gradients(params, 1.0) == 5.0);
  CHECK(params[0].grad()[0] == doctest::Approx(0.6));
  CHECK(params[1].grad()[0] == doctest::Approx(0.8));
  CHECK(clip_gradients(params, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("early stopping needs strict improvement") {
  EarlyStopping stop(2);
  CHECK(stop.update(1.0));
  CHECK(stop.update(0.9));
  CHECK_FALSE(stop.update(0.9));
  CHECK_FALSE(stop.should_stop());
  CHECK_FALSE(stop.update(0.95));
  CHECK(stop.should_stop());
  CHECK(stop.best() == 0.9);
}

TEST_CASE("training configuration validation") {
  TrainConfig c;
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.beta2 = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("ten Adam steps are bit-identical across runs") {
  auto run = [] {
    MultistreamGatModel model(tiny_model());
    const auto data = make_instances(4, 9);
    std::vector<Tensor> params;
    for (const auto& p : model.parameters()) params.push_back(p.tensor);
    OptimizerState state = OptimizerState::for_parameters(params);
    for (int step = 0; step < 10; ++step) {
      const WeatherInstance& inst = data[step % 4];
      mse_loss(model.forward(inst.x).prediction, inst.y).backward();
      clip_gradients(params, 5.0);
      adam_step(params, state, TrainConfig{});
    }
    return parameter_values(model);
  };
  CHECK(run() == run());
}

TEST_CASE("a few epochs at a small learning rate reduce the training loss") {
  MultistreamGatModel model(tiny_model());
  const auto train = make_instances(16, 1);
  const auto val = make_instances(4, 2);
  const double before = evaluate_mse(model, InstanceView::of(train));
  TrainConfig config;
  config.learning_rate = 1e-4;
  config.batch_size = 16;
  config.epochs = 10;
  config.patience = 100;
  const FitResult r = fit(model, InstanceView::of(train), InstanceView::of(val), config);
  CHECK(r.log.size() == 10);
  CHECK(r.log.back().train_mse < r.log.front().train_mse);
  // Restored parameters are the best-validation ones.
  CHECK(evaluate_mse(model, InstanceView::of(val)) == r.best_val_mse);
  CHECK(before > 0.0);
}

TEST_CASE("fit is deterministic for a fixed seed and depends on it") {
  const auto train = make_instances(12, 1);
  const auto val = make_instances(3, 2);
  auto run = [&](std::uint64_t seed) {
    MultistreamGatModel model(tiny_model(seed));
    TrainConfig config;
    config.learning_rate = 1e-2;
    config.batch_size = 4;
    config.epochs = 3;
    config.seed = seed;
    const FitResult r = fit(model, InstanceView::of(train), InstanceView::of(val), config);
    std::vector<double> losses;
    for (const auto& e : r.log) {
      losses.push_back(e.train_mse);
      losses.push_back(e.val_mse);
    }
    return std::make_pair(losses, parameter_values(model));
  };
  const auto a = run(5), b = run(5), c = run(6);
  CHECK(a == b);
  CHECK(a.second != c.second);
}

TEST_CASE("patience ends training once validation stops improving") {
  MultistreamGatModel model(tiny_model());
  const auto train = make_instances(8, 1);
  const auto val = make_instances(3, 2);
  TrainConfig config;
  config.learning_rate = 0.5;
  config.epochs = 200;
  config.patience = 3;
  config.batch_size = 8;
  std::size_t callbacks = 0;
  const FitResult r = fit(model, InstanceView::of(train), InstanceView::of(val), config,
                          [&](const EpochRecord&) { ++callbacks; });
  CHECK(callbacks == r.log.size());
  if (r.stopped_early) {
    CHECK(r.log.size() == r.best_epoch + 3);
  } else {
    CHECK(r.log.size() == 200);
  }
  for (const auto& e : r.log) CHECK(e.val_mse >= r.best_val_mse);
}

TEST_CASE("overflowing loss is reported as divergence and best weights kept") {
  MultistreamGatModel model(tiny_model());
  const auto initial = parameter_values(model);
  const auto train = make_instances(4, 1, 1e200);
  const auto val = make_instances(2, 2);
  TrainConfig config;
  config.epochs = 5;
  const FitResult r = fit(model, InstanceView::of(train), InstanceView::of(val), config);
  CHECK(r.diverged);
  CHECK(r.divergence_message.find("epoch 1") != std::string::npos);
  CHECK(r.log.empty());
  CHECK(parameter_values(model) == initial);
}

TEST_CASE("predictions are laid out instance-major") {
  const MultistreamGatModel model(tiny_model());
  const auto data = make_instances(5, 4);
  const auto preds = predict_all(model, InstanceView::of(data));
  CHECK(preds.size() == 15);
  const auto third = model.forward(data[2].x).prediction.to_vector();
  CHECK(std::vector<double>(preds.begin() + 6, preds.begin() + 9) == third);
  CHECK_THROWS_AS(evaluate_mse(model, InstanceView::of(std::vector<WeatherInstance>{})),
                  DataError);
}

TEST_CASE("epoch record JSON") {
  EpochRecord r{3, 0.5, 0.25, 1.0};
  const nlohmann::json j = r.to_json();
  CHECK(j.at("epoch") == 3);
  CHECK(j.at("train_mse") == 0.5);
  CHECK(j.at("val_mse") == 0.25);
  CHECK(j.contains("seconds"));
}
