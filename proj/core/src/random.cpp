#include "windgat/random.hpp"

#include <cmath>
#include <limits>

namespace windgat {

std::size_t Rng::below(std::size_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

Tensor uniform_tensor(Rng& rng, Shape shape, double lo, double hi,
                      bool requires_grad) {
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = rng.uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(values), requires_grad);
}

Tensor glorot_uniform(Rng& rng, Shape shape, std::size_t fan_in,
                      std::size_t fan_out) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_tensor(rng, std::move(shape), -limit, limit, true);
}

}  // namespace windgat
