#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace windgat {

// Mean absolute error over paired values. Throws DataError on empty or
// mismatched input.
double mae(std::span<const double> actual, std::span<const double> predicted);
double mse(std::span<const double> actual, std::span<const double> predicted);

// MAE per city for row-major [instances × cities] data.
std::vector<double> per_city_mae(std::span<const double> actual,
                                 std::span<const double> predicted,
                                 std::size_t cities);

struct EvalReport {
  std::size_t horizon = 0;
  std::size_t count = 0;  // instance × city pairs
  double mae = 0.0;
  double mse = 0.0;
  std::vector<std::string> cities;
  std::vector<double> city_mae;
};

// Both inputs are raw-unit [instances × cities] arrays.
EvalReport evaluate_predictions(std::span<const double> actual,
                                std::span<const double> predicted,
                                const std::vector<std::string>& cities,
                                std::size_t horizon);

nlohmann::json to_json(const EvalReport& report);

}  // namespace windgat
