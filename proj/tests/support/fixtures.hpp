#pragma once

// Synthetic weather data for tests: temp directories, per-city CSVs and
// in-memory series.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "windgat/data.hpp"

namespace windgat::testing {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("windgat-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

using ValueFn = std::function<double(std::size_t t, std::size_t city, std::size_t var)>;

// Smooth, non-constant default signal.
inline double default_value(std::size_t t, std::size_t city, std::size_t var) {
  return 5.0 + 3.0 * std::sin(0.3 * static_cast<double>(t) + static_cast<double>(city)) +
         0.5 * static_cast<double>(var) + 0.01 * static_cast<double>(t % 17);
}

inline Timestamp at_hour(int y, unsigned m, unsigned d, int hour = 0) {
  using namespace std::chrono;
  return sys_days{year{y} / month{m} / day{d}} + hours{hour};
}

// Three cities, two variables, horizons {1, 2}.
inline DatasetProfile small_profile(Timestamp test_begin) {
  DatasetProfile p;
  p.name = "SYN";
  p.cities = {"Alpha", "Beta", "Gamma"};
  p.variables = {"wind_speed", "temperature"};
  p.horizons = {1, 2};
  p.test_begin = test_begin;
  return p;
}

inline WeatherSeries make_series(const DatasetProfile& profile, Timestamp start,
                                 std::size_t hours, const ValueFn& fn = default_value) {
  WeatherSeries s;
  s.cities = profile.cities;
  s.variables = profile.variables;
  s.values.resize(hours * s.cities.size() * s.variables.size());
  for (std::size_t t = 0; t < hours; ++t) {
    s.timestamps.push_back(start + std::chrono::hours{t});
    for (std::size_t c = 0; c < s.cities.size(); ++c)
      for (std::size_t v = 0; v < s.variables.size(); ++v) s.at(t, c, v) = fn(t, c, v);
  }
  return s;
}

inline void write_series_csv(const WeatherSeries& s, std::size_t city,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "timestamp";
  for (const auto& v : s.variables) out << ',' << v;
  out << '\n';
  out.precision(17);
  for (std::size_t t = 0; t < s.length(); ++t) {
    out << format_timestamp(s.timestamps[t]);
    for (std::size_t v = 0; v < s.variable_count(); ++v) out << ',' << s.at(t, city, v);
    out << '\n';
  }
}

// One CSV per city, named "<city>.csv", in profile order.
inline std::vector<std::filesystem::path> write_city_csvs(const WeatherSeries& s,
                                                          const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  for (std::size_t c = 0; c < s.city_count(); ++c) {
    paths.push_back(dir / (s.cities[c] + ".csv"));
    write_series_csv(s, c, paths.back());
  }
  return paths;
}

// Long-form single window covering rows [begin, begin + count).
inline void write_window_csv(const WeatherSeries& s, std::size_t begin, std::size_t count,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "timestamp,city";
  for (const auto& v : s.variables) out << ',' << v;
  out << '\n';
  out.precision(17);
  for (std::size_t c = 0; c < s.city_count(); ++c)
    for (std::size_t t = begin; t < begin + count; ++t) {
      out << format_timestamp(s.timestamps[t]) << ',' << s.cities[c];
      for (std::size_t v = 0; v < s.variable_count(); ++v) out << ',' << s.at(t, c, v);
      out << '\n';
    }
}

}  // namespace windgat::testing
