#include "windgat/metrics.hpp"

#include <cmath>

#include "windgat/errors.hpp"

namespace windgat {

namespace {

void require_pairs(std::span<const double> actual,
                   std::span<const double> predicted) {
  if (actual.empty()) throw DataError("metric on empty input");
  if (actual.size() != predicted.size()) {
    throw DataError("metric inputs differ in length: " +
                    std::to_string(actual.size()) + " vs " +
                    std::to_string(predicted.size()));
  }
}

}  // namespace

double mae(std::span<const double> actual, std::span<const double> predicted) {
  require_pairs(actual, predicted);
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    total += std::abs(actual[i] - predicted[i]);
  }
  return total / static_cast<double>(actual.size());
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
  require_pairs(actual, predicted);
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    total += d * d;
  }
  return total / static_cast<double>(actual.size());
}

std::vector<double> per_city_mae(std::span<const double> actual,
                                 std::span<const double> predicted,
                                 std::size_t cities) {
  require_pairs(actual, predicted);
  if (cities == 0 || actual.size() % cities != 0) {
    throw DataError("per_city_mae: length " + std::to_string(actual.size()) +
                    " is not a multiple of " + std::to_string(cities) +
                    " cities");
  }
  const std::size_t rows = actual.size() / cities;
  std::vector<double> out(cities, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cities; ++c)
      out[c] += std::abs(actual[r * cities + c] - predicted[r * cities + c]);
  for (double& v : out) v /= static_cast<double>(rows);
  return out;
}

EvalReport evaluate_predictions(std::span<const double> actual,
                                std::span<const double> predicted,
                                const std::vector<std::string>& cities,
                                std::size_t horizon) {
  EvalReport report;
  report.horizon = horizon;
  report.count = actual.size();
  report.mae = mae(actual, predicted);
  report.mse = mse(actual, predicted);
  report.cities = cities;
  report.city_mae = per_city_mae(actual, predicted, cities.size());
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_city = nlohmann::json::object();
  for (std::size_t c = 0; c < report.cities.size(); ++c) {
    per_city[report.cities[c]] = report.city_mae[c];
  }
  return {{"horizon", report.horizon},
          {"count", report.count},
          {"mae", report.mae},
          {"mse", report.mse},
          {"cities", report.cities},
          {"per_city_mae", per_city}};
}

}  // namespace windgat
