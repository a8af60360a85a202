#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "windgat/data.hpp"
#include "windgat/model.hpp"
#include "windgat/tensor.hpp"

namespace windgat {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t patience = 10;
  // Global gradient-norm clip; 0 disables clipping.
  double clip_norm = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// Mean of squared differences over every entry; shapes must match.
Tensor mse_loss(const Tensor& prediction, const Tensor& target);

struct OptimizerState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::size_t step = 0;

  static OptimizerState for_parameters(const std::vector<Tensor>& params);
};

// One Adam update with bias correction. A parameter without a gradient is
// treated as having a zero gradient. Throws NumericError, leaving every
// parameter untouched, if any gradient is non-finite.
void adam_step(std::vector<Tensor>& params, OptimizerState& state,
               const TrainConfig& config);

// Scales all gradients so their joint L2 norm is at most max_norm. Returns
// the norm before clipping.
double clip_gradients(std::vector<Tensor>& params, double max_norm);

// Random access to training instances without materializing them all.
struct InstanceView {
  std::size_t count = 0;
  std::function<WeatherInstance(std::size_t)> get;

  static InstanceView of(const WindowSet& windows);
  static InstanceView of(const std::vector<WeatherInstance>& instances);
};

// Normalized predictions, row-major [instances × N].
std::vector<double> predict_all(const MultistreamGatModel& model,
                                const InstanceView& data);
// Mean squared error on the normalized scale.
double evaluate_mse(const MultistreamGatModel& model, const InstanceView& data);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

// Tracks the best validation loss and signals a stop after `patience`
// consecutive epochs without strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true if `val_loss` is a new best.
  bool update(double val_loss);
  bool should_stop() const { return stale_epochs_ >= patience_; }
  double best() const { return best_; }
  std::size_t stale_epochs() const { return stale_epochs_; }

 private:
  std::size_t patience_;
  std::size_t stale_epochs_ = 0;
  double best_ = 0.0;
  bool has_best_ = false;
};

struct FitResult {
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
  bool stopped_early = false;
  bool diverged = false;
  std::string divergence_message;
};

// Mini-batch Adam on MSE with a seed-determined shuffle each epoch. After
// every epoch the validation MSE is evaluated; the best parameters are kept
// and restored into `model` on return (also after divergence).
FitResult fit(MultistreamGatModel& model, const InstanceView& train,
              const InstanceView& val, const TrainConfig& config,
              const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace windgat
