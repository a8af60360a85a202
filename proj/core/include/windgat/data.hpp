#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "windgat/tensor.hpp"

namespace windgat {

using Timestamp = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DDTHH:MM[:SS]" (a space may replace the 'T', a trailing
// 'Z' is allowed). Returns nullopt on malformed input.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

// Station list, variable list and evaluation protocol of one dataset.
struct DatasetProfile {
  std::string name;
  std::vector<std::string> cities;
  std::vector<std::string> variables;
  std::string wind_speed_variable = "wind_speed";
  std::vector<std::size_t> horizons;
  // Test instances start on/after test_begin and (if set) have their target
  // strictly before test_end.
  Timestamp test_begin{};
  std::optional<Timestamp> test_end;

  std::size_t wind_speed_index() const;
  bool allows_horizon(std::size_t h) const;
  std::string horizons_text() const;  // e.g. "{2,4,6,8,10}"

  // "NL": 7 Dutch stations, 6 variables, test from 2019-01-01.
  static DatasetProfile netherlands();
  // "DK": 5 Danish stations, 4 variables, test year 2010.
  static DatasetProfile denmark();
  // Looks up "NL" or "DK"; throws ConfigError otherwise.
  static DatasetProfile builtin(std::string_view name);
};

// Hourly, gap-free observations for every city. values is [L × N × F].
struct WeatherSeries {
  std::vector<std::string> cities;
  std::vector<std::string> variables;
  std::vector<Timestamp> timestamps;
  std::vector<double> values;

  std::size_t length() const { return timestamps.size(); }
  std::size_t city_count() const { return cities.size(); }
  std::size_t variable_count() const { return variables.size(); }
  double& at(std::size_t t, std::size_t city, std::size_t var) {
    return values[(t * cities.size() + city) * variables.size() + var];
  }
  double at(std::size_t t, std::size_t city, std::size_t var) const {
    return values[(t * cities.size() + city) * variables.size() + var];
  }
};

// Reads one CSV per city, in profile city order. Each file has the header
// `timestamp,<var1>,...,<varF>` with the profile's variables in order.
// Missing hours, misaligned ranges, bad numbers and wrong columns throw
// DataError with file/line context.
WeatherSeries load_csv(const std::vector<std::filesystem::path>& paths,
                       const DatasetProfile& profile);

// Per-(city, variable) min/max in raw units.
struct NormalizationStats {
  std::size_t cities = 0;
  std::size_t variables = 0;
  std::vector<double> min;  // [N × F]
  std::vector<double> max;  // [N × F]

  double normalize(double v, std::size_t city, std::size_t var) const;
  double denormalize(double v, std::size_t city, std::size_t var) const;

  bool operator==(const NormalizationStats&) const = default;
};

// Fits min-max statistics on rows [row_begin, row_end). Throws DataError for
// an empty range or a constant channel.
NormalizationStats fit_normalize(const WeatherSeries& series,
                                 std::size_t row_begin, std::size_t row_end);
// (v - min) / (max - min) per channel; values outside the fitted range are
// kept as-is (no clamping).
WeatherSeries apply_normalize(const WeatherSeries& series,
                              const NormalizationStats& stats);
WeatherSeries denormalize(const WeatherSeries& series,
                          const NormalizationStats& stats);

struct WeatherInstance {
  Tensor x;  // [N × T × F]
  Tensor y;  // [N], wind speed at t0 + T - 1 + h
  Timestamp start;
  Timestamp target_time;
};

// Stride-1 sliding windows over a shared series, materialized on access.
class WindowSet {
 public:
  WindowSet(std::shared_ptr<const WeatherSeries> series, std::size_t timesteps,
            std::size_t horizon, std::size_t wind_speed_index);

  std::size_t size() const { return starts_.size(); }
  bool empty() const { return starts_.empty(); }
  WeatherInstance operator[](std::size_t k) const;

  Timestamp start_time(std::size_t k) const;
  Timestamp target_time(std::size_t k) const;
  // Row index of the target timestep in the series.
  std::size_t target_row(std::size_t k) const;

  WindowSet subset(const std::vector<std::size_t>& positions) const;
  // Same windows over another series with identical length and layout.
  WindowSet rebind(std::shared_ptr<const WeatherSeries> series) const;

  const WeatherSeries& series() const { return *series_; }
  std::size_t timesteps() const { return timesteps_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t wind_speed_index() const { return wind_speed_index_; }

 private:
  friend WindowSet make_windows(std::shared_ptr<const WeatherSeries> series,
                                std::size_t timesteps, std::size_t horizon,
                                std::size_t wind_speed_index);

  std::shared_ptr<const WeatherSeries> series_;
  std::size_t timesteps_;
  std::size_t horizon_;
  std::size_t wind_speed_index_;
  std::vector<std::size_t> starts_;
};

// All L - T - h + 1 windows. Throws DataError when L < T + h.
WindowSet make_windows(std::shared_ptr<const WeatherSeries> series,
                       std::size_t timesteps, std::size_t horizon,
                       std::size_t wind_speed_index);

struct SplitWindows {
  WindowSet train;
  WindowSet val;
  WindowSet test;
};

// Test: windows starting at/after profile.test_begin (and with target before
// test_end when set). Train/val: windows whose target precedes test_begin,
// split chronologically 90/10. Windows straddling the boundary are dropped.
// Throws DataError if any split is empty.
SplitWindows split_by_date(const WindowSet& windows,
                           const DatasetProfile& profile);

// Only the test windows of `windows` (possibly empty).
WindowSet select_test_windows(const WindowSet& windows,
                              const DatasetProfile& profile);

// Full pipeline: windows on the raw series, split by date, fit normalization
// on the rows covered by the training windows, then rebind every split to
// the normalized series.
struct PreparedData {
  NormalizationStats stats;
  SplitWindows splits;
};
PreparedData prepare_dataset(const WeatherSeries& raw,
                             const DatasetProfile& profile,
                             std::size_t timesteps, std::size_t horizon);

// Reads a single-window CSV in long form: `timestamp,city,<vars...>` with
// exactly `timesteps` rows per profile city, and returns the normalized
// [N × T × F] input.
Tensor load_window_csv(const std::filesystem::path& path,
                       const DatasetProfile& profile,
                       const NormalizationStats& stats, std::size_t timesteps);

}  // namespace windgat
