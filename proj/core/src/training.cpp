#include "windgat/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "windgat/errors.hpp"
#include "windgat/ops.hpp"
#include "windgat/random.hpp"

namespace windgat {

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  if (patience == 0) throw ConfigError("train.patience must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train.beta1 and train.beta2 must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("train.epsilon must be > 0");
  if (clip_norm < 0.0) throw ConfigError("train.clip_norm must be >= 0");
}

Tensor mse_loss(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw DimensionError("mse_loss: prediction " +
                         shape_to_string(prediction.shape()) +
                         " vs target " + shape_to_string(target.shape()));
  }
  const Tensor diff = ops::sub(prediction, target);
  return ops::mean(ops::mul(diff, diff));
}

OptimizerState OptimizerState::for_parameters(const std::vector<Tensor>& params) {
  OptimizerState state;
  for (const Tensor& p : params) {
    state.first_moment.emplace_back(p.numel(), 0.0);
    state.second_moment.emplace_back(p.numel(), 0.0);
  }
  return state;
}

void adam_step(std::vector<Tensor>& params, OptimizerState& state,
               const TrainConfig& config) {
  if (state.first_moment.size() != params.size()) {
    throw DimensionError("adam_step: optimizer state does not match parameters");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (state.first_moment[k].size() != params[k].numel()) {
      throw DimensionError("adam_step: moment shape mismatch for parameter " +
                           std::to_string(k));
    }
    for (double g : params[k].grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in parameter " +
                           std::to_string(k));
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].mutable_data();
    auto grad = params[k].grad();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

double clip_gradients(std::vector<Tensor>& params, double max_norm) {
  double squared = 0.0;
  for (const Tensor& p : params)
    for (double g : p.grad()) squared += g * g;
  const double norm = std::sqrt(squared);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Tensor& p : params)
      for (double& g : p.mutable_grad()) g *= factor;
  }
  return norm;
}

InstanceView InstanceView::of(const WindowSet& windows) {
  return {windows.size(), [windows](std::size_t k) { return windows[k]; }};
}

InstanceView InstanceView::of(const std::vector<WeatherInstance>& instances) {
  return {instances.size(),
          [&instances](std::size_t k) { return instances.at(k); }};
}

std::vector<double> predict_all(const MultistreamGatModel& model,
                                const InstanceView& data) {
  NoGradGuard no_grad;
  std::vector<double> out;
  out.reserve(data.count * model.config().cities);
  for (std::size_t k = 0; k < data.count; ++k) {
    const WeatherInstance inst = data.get(k);
    const Tensor pred = model.forward(inst.x).prediction;
    out.insert(out.end(), pred.data().begin(), pred.data().end());
  }
  return out;
}

double evaluate_mse(const MultistreamGatModel& model, const InstanceView& data) {
  if (data.count == 0) throw DataError("evaluate_mse: empty dataset");
  NoGradGuard no_grad;
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < data.count; ++k) {
    const WeatherInstance inst = data.get(k);
    const Tensor pred = model.forward(inst.x).prediction;
    for (std::size_t c = 0; c < pred.numel(); ++c) {
      const double d = pred.data()[c] - inst.y.data()[c];
      total += d * d;
      ++n;
    }
  }
  return total / static_cast<double>(n);
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch},
          {"train_mse", train_mse},
          {"val_mse", val_mse},
          {"seconds", seconds}};
}

bool EarlyStopping::update(double val_loss) {
  if (!has_best_ || val_loss < best_) {
    best_ = val_loss;
    has_best_ = true;
    stale_epochs_ = 0;
    return true;
  }
  ++stale_epochs_;
  return false;
}

namespace {

std::vector<std::vector<double>> snapshot(const std::vector<Tensor>& params) {
  std::vector<std::vector<double>> values;
  for (const Tensor& p : params) values.push_back(p.to_vector());
  return values;
}

void restore(std::vector<Tensor>& params,
             const std::vector<std::vector<double>>& values) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto dst = params[k].mutable_data();
    std::copy(values[k].begin(), values[k].end(), dst.begin());
  }
}

}  // namespace

FitResult fit(MultistreamGatModel& model, const InstanceView& train,
              const InstanceView& val, const TrainConfig& config,
              const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train.count == 0 || val.count == 0) {
    throw DataError("fit: train and validation sets must be non-empty");
  }
  std::vector<Tensor> params;
  for (const NamedParameter& p : model.parameters()) params.push_back(p.tensor);
  OptimizerState state = OptimizerState::for_parameters(params);
  Rng shuffle_rng(config.seed);
  EarlyStopping stopper(config.patience);
  FitResult result;
  std::vector<std::vector<double>> best = snapshot(params);

  std::vector<std::size_t> order(train.count);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    // Fisher-Yates with the portable generator.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }

    EpochRecord record;
    record.epoch = epoch;
    try {
      double loss_sum = 0.0;
      for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
        const std::size_t end = std::min(order.size(), begin + config.batch_size);
        std::vector<Tensor> preds;
        std::vector<Tensor> targets;
        for (std::size_t i = begin; i < end; ++i) {
          const WeatherInstance inst = train.get(order[i]);
          const std::size_t n = inst.y.numel();
          preds.push_back(ops::reshape(model.forward(inst.x).prediction, {1, n}));
          targets.push_back(ops::reshape(inst.y, {1, n}));
        }
        const Tensor loss = mse_loss(ops::concat(preds, 0), ops::concat(targets, 0));
        loss.backward();
        if (config.clip_norm > 0.0) clip_gradients(params, config.clip_norm);
        adam_step(params, state, config);
        loss_sum += loss.item() * static_cast<double>(end - begin);
      }
      record.train_mse = loss_sum / static_cast<double>(order.size());
      record.val_mse = evaluate_mse(model, val);
    } catch (const NumericError& e) {
      result.diverged = true;
      result.divergence_message =
          "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    record.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);

    if (stopper.update(record.val_mse)) {
      best = snapshot(params);
      result.best_epoch = epoch;
      result.best_val_mse = record.val_mse;
    }
    if (stopper.should_stop()) {
      result.stopped_early = true;
      break;
    }
  }
  restore(params, best);
  return result;
}

}  // namespace windgat
