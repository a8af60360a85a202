#include <benchmark/benchmark.h>

#include "windgat/model.hpp"
#include "windgat/ops.hpp"
#include "windgat/random.hpp"
#include "windgat/training.hpp"

using namespace windgat;

namespace {

// Seven stations, six variables, 30-hour windows.
ModelConfig dutch_config() {
  ModelConfig c;
  c.cities = 7;
  c.variables = 6;
  c.seed = 1;
  return c;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = uniform_tensor(rng, {n, n}, -1, 1, false);
  const Tensor b = uniform_tensor(rng, {n, n}, -1, 1, false);
  for (auto _ : state) benchmark::DoNotOptimize(ops::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_ForwardInference(benchmark::State& state) {
  const MultistreamGatModel model(dutch_config());
  Rng rng(2);
  const Tensor x = uniform_tensor(rng, {7, 30, 6}, 0, 1, false);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x).prediction);
}
BENCHMARK(BM_ForwardInference)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const MultistreamGatModel model(dutch_config());
  Rng rng(3);
  const Tensor x = uniform_tensor(rng, {7, 30, 6}, 0, 1, false);
  const Tensor y = uniform_tensor(rng, {7}, 0, 1, false);
  for (auto _ : state) mse_loss(model.forward(x).prediction, y).backward();
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
