#pragma once

#include <cstdint>
#include <random>

#include "windgat/tensor.hpp"

namespace windgat {

// Seeded generator with a portable uniform draw (53 mantissa bits taken from
// mt19937_64), so the same seed yields the same numbers on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

Tensor uniform_tensor(Rng& rng, Shape shape, double lo, double hi,
                      bool requires_grad);

// Glorot/Xavier uniform: U(-l, l) with l = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Rng& rng, Shape shape, std::size_t fan_in,
                      std::size_t fan_out);

}  // namespace windgat
