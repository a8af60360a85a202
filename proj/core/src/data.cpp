#include "windgat/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "windgat/errors.hpp"

namespace windgat {

namespace {

using std::chrono::hours;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  // YYYY-MM-DD?HH:MM[:SS]
  if (text.size() != 16 && text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || (text.size() == 19 && text[16] != ':')) {
    return std::nullopt;
  }
  int year = 0;
  unsigned month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month) ||
      !parse_int(text.substr(8, 2), day) || !parse_int(text.substr(11, 2), hour) ||
      !parse_int(text.substr(14, 2), minute) ||
      (text.size() == 19 && !parse_int(text.substr(17, 2), second))) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) return std::nullopt;
  return Timestamp{std::chrono::sys_days{ymd}} + hours{hour} +
         std::chrono::minutes{minute} + std::chrono::seconds{second};
}

std::string format_timestamp(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::size_t DatasetProfile::wind_speed_index() const {
  auto it = std::find(variables.begin(), variables.end(), wind_speed_variable);
  if (it == variables.end()) {
    throw ConfigError("profile " + name + " has no variable '" +
                      wind_speed_variable + "'");
  }
  return static_cast<std::size_t>(it - variables.begin());
}

bool DatasetProfile::allows_horizon(std::size_t h) const {
  return std::find(horizons.begin(), horizons.end(), h) != horizons.end();
}

std::string DatasetProfile::horizons_text() const {
  std::string out = "{";
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(horizons[i]);
  }
  return out + "}";
}

DatasetProfile DatasetProfile::netherlands() {
  DatasetProfile p;
  p.name = "NL";
  p.cities = {"Schiphol", "De Bilt",   "Leeuwarden", "Eelde",
              "Rotterdam", "Eindhoven", "Maastricht"};
  p.variables = {"wind_speed", "wind_direction", "temperature",
                 "dew_point",  "air_pressure",   "rain_amount"};
  p.horizons = {2, 4, 6, 8, 10};
  p.test_begin = *parse_timestamp("2019-01-01T00:00");
  return p;
}

DatasetProfile DatasetProfile::denmark() {
  DatasetProfile p;
  p.name = "DK";
  p.cities = {"Aalborg", "Aarhus", "Esbjerg", "Odense", "Roskilde"};
  p.variables = {"temperature", "pressure", "wind_speed", "wind_direction"};
  p.horizons = {6, 12, 18, 24};
  p.test_begin = *parse_timestamp("2010-01-01T00:00");
  p.test_end = *parse_timestamp("2011-01-01T00:00");
  return p;
}

DatasetProfile DatasetProfile::builtin(std::string_view name) {
  if (name == "NL") return netherlands();
  if (name == "DK") return denmark();
  throw ConfigError("unknown dataset profile '" + std::string(name) +
                    "' (expected NL or DK)");
}

WeatherSeries load_csv(const std::vector<std::filesystem::path>& paths,
                       const DatasetProfile& profile) {
  if (paths.size() != profile.cities.size()) {
    throw DataError("profile " + profile.name + " expects " +
                    std::to_string(profile.cities.size()) +
                    " city files, got " + std::to_string(paths.size()));
  }
  const std::size_t n = profile.cities.size();
  const std::size_t f = profile.variables.size();

  std::vector<std::vector<Timestamp>> times(n);
  std::vector<std::vector<double>> rows(n);  // [L × F] per city
  for (std::size_t c = 0; c < n; ++c) {
    const auto& path = paths[c];
    const std::string& city = profile.cities[c];
    const std::vector<std::string> lines = read_lines(path);
    std::size_t first = 0;
    while (first < lines.size() && blank(lines[first])) ++first;
    if (first == lines.size()) throw DataError(path.string() + ": empty file");

    const auto header = split_fields(lines[first]);
    bool header_ok = header.size() == f + 1 && header[0] == "timestamp";
    for (std::size_t v = 0; header_ok && v < f; ++v) {
      header_ok = header[v + 1] == profile.variables[v];
    }
    if (!header_ok) {
      std::string expected = "timestamp";
      for (const auto& v : profile.variables) expected += "," + v;
      throw DataError(where(path, first + 1) + ": wrong column set for city " +
                      city + ", expected header '" + expected + "'");
    }

    for (std::size_t li = first + 1; li < lines.size(); ++li) {
      if (blank(lines[li])) continue;
      const auto fields = split_fields(lines[li]);
      if (fields.size() != f + 1) {
        throw DataError(where(path, li + 1) + ": expected " +
                        std::to_string(f + 1) + " fields, got " +
                        std::to_string(fields.size()));
      }
      const auto ts = parse_timestamp(fields[0]);
      if (!ts) {
        throw DataError(where(path, li + 1) + ": unparseable timestamp '" +
                        std::string(fields[0]) + "'");
      }
      if (!times[c].empty()) {
        const Timestamp expected = times[c].back() + hours{1};
        if (*ts < expected) {
          throw DataError(where(path, li + 1) +
                          ": timestamps not strictly hourly increasing at " +
                          format_timestamp(*ts));
        }
        if (*ts > expected) {
          throw DataError(where(path, li + 1) + ": missing timestamp " +
                          format_timestamp(expected) + " for city " + city);
        }
      }
      times[c].push_back(*ts);
      for (std::size_t v = 0; v < f; ++v) {
        const auto value = parse_number(fields[v + 1]);
        if (!value) {
          throw DataError(where(path, li + 1) + ": unparseable number '" +
                          std::string(fields[v + 1]) + "' in column " +
                          profile.variables[v]);
        }
        rows[c].push_back(*value);
      }
    }
    if (times[c].empty()) throw DataError(path.string() + ": no data rows");
  }

  for (std::size_t c = 1; c < n; ++c) {
    if (times[c].front() != times[0].front() ||
        times[c].size() != times[0].size()) {
      throw DataError("misaligned ranges: " + profile.cities[c] + " covers " +
                      format_timestamp(times[c].front()) + " .. " +
                      format_timestamp(times[c].back()) + " but " +
                      profile.cities[0] + " covers " +
                      format_timestamp(times[0].front()) + " .. " +
                      format_timestamp(times[0].back()));
    }
  }

  WeatherSeries series;
  series.cities = profile.cities;
  series.variables = profile.variables;
  series.timestamps = times[0];
  const std::size_t len = series.timestamps.size();
  series.values.resize(len * n * f);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t v = 0; v < f; ++v) series.at(t, c, v) = rows[c][t * f + v];
  return series;
}

double NormalizationStats::normalize(double v, std::size_t city,
                                     std::size_t var) const {
  const std::size_t k = city * variables + var;
  return (v - min[k]) / (max[k] - min[k]);
}

double NormalizationStats::denormalize(double v, std::size_t city,
                                       std::size_t var) const {
  const std::size_t k = city * variables + var;
  return v * (max[k] - min[k]) + min[k];
}

NormalizationStats fit_normalize(const WeatherSeries& series,
                                 std::size_t row_begin, std::size_t row_end) {
  if (row_begin >= row_end || row_end > series.length()) {
    throw DataError("fit_normalize: empty or out-of-range training rows");
  }
  NormalizationStats stats;
  stats.cities = series.city_count();
  stats.variables = series.variable_count();
  const std::size_t channels = stats.cities * stats.variables;
  stats.min.assign(channels, 0.0);
  stats.max.assign(channels, 0.0);
  for (std::size_t c = 0; c < stats.cities; ++c) {
    for (std::size_t v = 0; v < stats.variables; ++v) {
      double lo = series.at(row_begin, c, v);
      double hi = lo;
      for (std::size_t t = row_begin + 1; t < row_end; ++t) {
        lo = std::min(lo, series.at(t, c, v));
        hi = std::max(hi, series.at(t, c, v));
      }
      if (!(hi > lo)) {
        throw DataError("degenerate channel: " + series.variables[v] + " of " +
                        series.cities[c] + " is constant over training rows");
      }
      stats.min[c * stats.variables + v] = lo;
      stats.max[c * stats.variables + v] = hi;
    }
  }
  return stats;
}

namespace {

template <typename Fn>
WeatherSeries map_channels(const WeatherSeries& series,
                           const NormalizationStats& stats, Fn fn) {
  if (stats.cities != series.city_count() ||
      stats.variables != series.variable_count()) {
    throw DataError("normalization stats shape does not match series");
  }
  WeatherSeries out = series;
  for (std::size_t t = 0; t < out.length(); ++t)
    for (std::size_t c = 0; c < out.city_count(); ++c)
      for (std::size_t v = 0; v < out.variable_count(); ++v)
        out.at(t, c, v) = fn(series.at(t, c, v), c, v);
  return out;
}

}  // namespace

WeatherSeries apply_normalize(const WeatherSeries& series,
                              const NormalizationStats& stats) {
  return map_channels(series, stats, [&](double x, std::size_t c, std::size_t v) {
    return stats.normalize(x, c, v);
  });
}

WeatherSeries denormalize(const WeatherSeries& series,
                          const NormalizationStats& stats) {
  return map_channels(series, stats, [&](double x, std::size_t c, std::size_t v) {
    return stats.denormalize(x, c, v);
  });
}

WindowSet::WindowSet(std::shared_ptr<const WeatherSeries> series,
                     std::size_t timesteps, std::size_t horizon,
                     std::size_t wind_speed_index)
    : series_(std::move(series)),
      timesteps_(timesteps),
      horizon_(horizon),
      wind_speed_index_(wind_speed_index) {}

WeatherInstance WindowSet::operator[](std::size_t k) const {
  const WeatherSeries& s = *series_;
  const std::size_t n = s.city_count(), f = s.variable_count();
  const std::size_t t0 = starts_.at(k);
  std::vector<double> x(n * timesteps_ * f);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t t = 0; t < timesteps_; ++t)
      for (std::size_t v = 0; v < f; ++v)
        x[(c * timesteps_ + t) * f + v] = s.at(t0 + t, c, v);
  std::vector<double> y(n);
  const std::size_t target = target_row(k);
  for (std::size_t c = 0; c < n; ++c) y[c] = s.at(target, c, wind_speed_index_);
  return {Tensor::from({n, timesteps_, f}, std::move(x)),
          Tensor::from({n}, std::move(y)), s.timestamps[t0],
          s.timestamps[target]};
}

Timestamp WindowSet::start_time(std::size_t k) const {
  return series_->timestamps[starts_.at(k)];
}

Timestamp WindowSet::target_time(std::size_t k) const {
  return series_->timestamps[target_row(k)];
}

std::size_t WindowSet::target_row(std::size_t k) const {
  return starts_.at(k) + timesteps_ - 1 + horizon_;
}

WindowSet WindowSet::subset(const std::vector<std::size_t>& positions) const {
  WindowSet out(series_, timesteps_, horizon_, wind_speed_index_);
  out.starts_.reserve(positions.size());
  for (std::size_t p : positions) out.starts_.push_back(starts_.at(p));
  return out;
}

WindowSet WindowSet::rebind(std::shared_ptr<const WeatherSeries> series) const {
  if (series->length() != series_->length() ||
      series->city_count() != series_->city_count() ||
      series->variable_count() != series_->variable_count()) {
    throw DataError("rebind: series layout differs");
  }
  WindowSet out = *this;
  out.series_ = std::move(series);
  return out;
}

WindowSet make_windows(std::shared_ptr<const WeatherSeries> series,
                       std::size_t timesteps, std::size_t horizon,
                       std::size_t wind_speed_index) {
  if (timesteps == 0 || horizon == 0) {
    throw DataError("make_windows: timesteps and horizon must be positive");
  }
  if (wind_speed_index >= series->variable_count()) {
    throw DataError("make_windows: wind speed index out of range");
  }
  const std::size_t len = series->length();
  if (len < timesteps + horizon) {
    throw DataError("series of length " + std::to_string(len) +
                    " is shorter than timesteps + horizon = " +
                    std::to_string(timesteps + horizon));
  }
  std::vector<std::size_t> positions(len - timesteps - horizon + 1);
  for (std::size_t k = 0; k < positions.size(); ++k) positions[k] = k;
  WindowSet all(std::move(series), timesteps, horizon, wind_speed_index);
  all.starts_ = std::move(positions);
  return all;
}

namespace {

bool is_test_window(const WindowSet& windows, std::size_t k,
                    const DatasetProfile& profile) {
  return windows.start_time(k) >= profile.test_begin &&
         (!profile.test_end || windows.target_time(k) < *profile.test_end);
}

}  // namespace

WindowSet select_test_windows(const WindowSet& windows,
                              const DatasetProfile& profile) {
  std::vector<std::size_t> test;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    if (is_test_window(windows, k, profile)) test.push_back(k);
  }
  return windows.subset(test);
}

SplitWindows split_by_date(const WindowSet& windows,
                           const DatasetProfile& profile) {
  std::vector<std::size_t> pool;
  std::vector<std::size_t> test;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    if (windows.target_time(k) < profile.test_begin) {
      pool.push_back(k);
    } else if (is_test_window(windows, k, profile)) {
      test.push_back(k);
    }
  }
  const std::size_t n_train = pool.size() * 9 / 10;
  std::vector<std::size_t> train(pool.begin(), pool.begin() + n_train);
  std::vector<std::size_t> val(pool.begin() + n_train, pool.end());
  if (train.empty() || val.empty() || test.empty()) {
    throw DataError("empty split (train " + std::to_string(train.size()) +
                    ", val " + std::to_string(val.size()) + ", test " +
                    std::to_string(test.size()) + ") for profile " +
                    profile.name);
  }
  return {windows.subset(train), windows.subset(val), windows.subset(test)};
}

PreparedData prepare_dataset(const WeatherSeries& raw,
                             const DatasetProfile& profile,
                             std::size_t timesteps, std::size_t horizon) {
  auto raw_ptr = std::make_shared<const WeatherSeries>(raw);
  const WindowSet windows =
      make_windows(raw_ptr, timesteps, horizon, profile.wind_speed_index());
  SplitWindows splits = split_by_date(windows, profile);
  const std::size_t train_end = splits.train.target_row(splits.train.size() - 1) + 1;
  NormalizationStats stats = fit_normalize(raw, 0, train_end);
  auto normalized =
      std::make_shared<const WeatherSeries>(apply_normalize(raw, stats));
  return {std::move(stats),
          {splits.train.rebind(normalized), splits.val.rebind(normalized),
           splits.test.rebind(normalized)}};
}

Tensor load_window_csv(const std::filesystem::path& path,
                       const DatasetProfile& profile,
                       const NormalizationStats& stats, std::size_t timesteps) {
  const std::size_t n = profile.cities.size();
  const std::size_t f = profile.variables.size();
  if (stats.cities != n || stats.variables != f) {
    throw DataError("normalization stats do not match profile " + profile.name);
  }
  const std::vector<std::string> lines = read_lines(path);
  std::size_t first = 0;
  while (first < lines.size() && blank(lines[first])) ++first;
  if (first == lines.size()) throw DataError(path.string() + ": empty file");
  const auto header = split_fields(lines[first]);
  bool header_ok = header.size() == f + 2 && header[0] == "timestamp" &&
                   header[1] == "city";
  for (std::size_t v = 0; header_ok && v < f; ++v) {
    header_ok = header[v + 2] == profile.variables[v];
  }
  if (!header_ok) {
    std::string expected = "timestamp,city";
    for (const auto& v : profile.variables) expected += "," + v;
    throw DataError(where(path, first + 1) + ": expected header '" + expected +
                    "'");
  }

  std::map<std::string, std::vector<std::pair<Timestamp, std::vector<double>>>,
           std::less<>>
      per_city;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (blank(lines[li])) continue;
    const auto fields = split_fields(lines[li]);
    if (fields.size() != f + 2) {
      throw DataError(where(path, li + 1) + ": expected " +
                      std::to_string(f + 2) + " fields");
    }
    const auto ts = parse_timestamp(fields[0]);
    if (!ts) throw DataError(where(path, li + 1) + ": unparseable timestamp");
    const std::string city(fields[1]);
    if (std::find(profile.cities.begin(), profile.cities.end(), city) ==
        profile.cities.end()) {
      throw DataError(where(path, li + 1) + ": unknown city '" + city + "'");
    }
    std::vector<double> values(f);
    for (std::size_t v = 0; v < f; ++v) {
      const auto value = parse_number(fields[v + 2]);
      if (!value) {
        throw DataError(where(path, li + 1) + ": unparseable number '" +
                        std::string(fields[v + 2]) + "'");
      }
      values[v] = *value;
    }
    per_city[city].emplace_back(*ts, std::move(values));
  }

  std::vector<double> x(n * timesteps * f);
  for (std::size_t c = 0; c < n; ++c) {
    auto it = per_city.find(profile.cities[c]);
    const std::size_t got = it == per_city.end() ? 0 : it->second.size();
    if (got != timesteps) {
      throw DataError("expected " + std::to_string(timesteps) +
                      " timesteps for city " + profile.cities[c] + ", got " +
                      std::to_string(got));
    }
    auto& rows = it->second;
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t t = 0; t < timesteps; ++t) {
      if (t > 0 && rows[t].first != rows[t - 1].first + hours{1}) {
        throw DataError("window for city " + profile.cities[c] +
                        " is not hourly contiguous at " +
                        format_timestamp(rows[t].first));
      }
      for (std::size_t v = 0; v < f; ++v) {
        x[(c * timesteps + t) * f + v] = stats.normalize(rows[t].second[v], c, v);
      }
    }
  }
  return Tensor::from({n, timesteps, f}, std::move(x));
}

}  // namespace windgat
