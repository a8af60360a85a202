#include <doctest.h>

#include <fstream>
#include <memory>
#include <set>

#include "fixtures.hpp"
#include "test_support.hpp"
#include "windgat/errors.hpp"

using namespace windgat;
using namespace windgat::testing;
using std::chrono::hours;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> read_all_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("timestamps parse in several spellings and format canonically") {
  const auto a = parse_timestamp("2019-01-01T05:00:00");
  const auto b = parse_timestamp("2019-01-01 05:00");
  const auto c = parse_timestamp("2019-01-01T05:00:00Z");
  REQUIRE(a);
  REQUIRE(b);
  REQUIRE(c);
  CHECK(*a == *b);
  CHECK(*a == *c);
  CHECK(*a == at_hour(2019, 1, 1, 5));
  CHECK(format_timestamp(*a) == "2019-01-01T05:00:00");
  CHECK_FALSE(parse_timestamp("2019-13-01T00:00"));
  CHECK_FALSE(parse_timestamp("yesterday"));
  CHECK_FALSE(parse_timestamp("2019-01-01T25:00"));
}

TEST_CASE("built-in profiles") {
  const DatasetProfile nl = DatasetProfile::builtin("NL");
  CHECK(nl.cities.size() == 7);
  CHECK(nl.variables.size() == 6);
  CHECK(nl.horizons_text() == "{2,4,6,8,10}");
  CHECK(nl.allows_horizon(10));
  CHECK_FALSE(nl.allows_horizon(3));
  CHECK(nl.variables[nl.wind_speed_index()] == "wind_speed");
  CHECK(nl.test_begin == at_hour(2019, 1, 1));

  const DatasetProfile dk = DatasetProfile::builtin("DK");
  CHECK(dk.cities.size() == 5);
  CHECK(dk.variables.size() == 4);
  CHECK(dk.horizons_text() == "{6,12,18,24}");
  CHECK(dk.test_end == at_hour(2011, 1, 1));
  CHECK(dk.variables[dk.wind_speed_index()] == "wind_speed");

  CHECK_THROWS_AS(DatasetProfile::builtin("XX"), ConfigError);
}

TEST_CASE("loading a 48-hour three-city fixture") {
  TempDir dir;
  const DatasetProfile profile = small_profile(at_hour(2020, 1, 3));
  const WeatherSeries expected = make_series(profile, at_hour(2020, 1, 1), 48);
  const WeatherSeries loaded = load_csv(write_city_csvs(expected, dir.path()), profile);
  CHECK(loaded.length() == 48);
  CHECK(loaded.city_count() == 3);
  CHECK(loaded.variable_count() == 2);
  CHECK(loaded.timestamps == expected.timestamps);
  CHECK(loaded.values == expected.values);
}

TEST_CASE("loading seven files for the Dutch profile") {
  TempDir dir;
  const DatasetProfile nl = DatasetProfile::netherlands();
  const WeatherSeries s = make_series(nl, at_hour(2018, 12, 30), 72);
  const WeatherSeries loaded = load_csv(write_city_csvs(s, dir.path()), nl);
  CHECK(loaded.city_count() == 7);
  CHECK(loaded.variable_count() == 6);
  CHECK(loaded.length() == 72);

  auto paths = write_city_csvs(s, dir.path());
  paths.pop_back();
  CHECK(error_of([&] { load_csv(paths, nl); }).find("expects 7 city files, got 6") !=
        std::string::npos);
}

TEST_CASE("a missing hour names the timestamp and the city") {
  TempDir dir;
  const DatasetProfile profile = small_profile(at_hour(2020, 1, 3));
  const WeatherSeries s = make_series(profile, at_hour(2020, 1, 1), 48);
  const auto paths = write_city_csvs(s, dir.path());
  auto lines = read_all_lines(paths[1]);
  lines.erase(lines.begin() + 11);  // drops 2020-01-01T10:00
  write_lines(paths[1], lines);
  const std::string msg = error_of([&] { load_csv(paths, profile); });
  CHECK(msg.find("missing timestamp 2020-01-01T10:00:00 for city Beta") != std::string::npos);
  CHECK(msg.find("Beta.csv:12") != std::string::npos);
}

TEST_CASE("malformed files are rejected with context") {
  TempDir dir;
  const DatasetProfile profile = small_profile(at_hour(2020, 1, 3));
  const WeatherSeries s = make_series(profile, at_hour(2020, 1, 1), 24);

  SUBCASE("wrong header") {
    const auto paths = write_city_csvs(s, dir.path());
    auto lines = read_all_lines(paths[0]);
    lines[0] = "timestamp,temperature,wind_speed";
    write_lines(paths[0], lines);
    CHECK(error_of([&] { load_csv(paths, profile); }).find("wrong column set for city Alpha") !=
          std::string::npos);
  }
  SUBCASE("bad number") {
    const auto paths = write_city_csvs(s, dir.path());
    auto lines = read_all_lines(paths[2]);
    lines[5] = format_timestamp(s.timestamps[4]) + ",abc,1.0";
    write_lines(paths[2], lines);
    const std::string msg = error_of([&] { load_csv(paths, profile); });
    CHECK(msg.find("Gamma.csv:6") != std::string::npos);
    CHECK(msg.find("unparseable number 'abc'") != std::string::npos);
  }
  SUBCASE("misaligned ranges") {
    auto paths = write_city_csvs(s, dir.path());
    const WeatherSeries later = make_series(profile, at_hour(2020, 1, 1, 1), 24);
    write_series_csv(later, 1, paths[1]);
    CHECK(error_of([&] { load_csv(paths, profile); }).find("misaligned ranges") !=
          std::string::npos);
  }
  SUBCASE("time going backwards") {
    const auto paths = write_city_csvs(s, dir.path());
    auto lines = read_all_lines(paths[0]);
    lines[4] = lines[3];
    write_lines(paths[0], lines);
    CHECK(error_of([&] { load_csv(paths, profile); }).find("not strictly hourly") !=
          std::string::npos);
  }
  SUBCASE("missing file") {
    auto paths = write_city_csvs(s, dir.path());
    paths[0] = dir / "nope.csv";
    CHECK(error_of([&] { load_csv(paths, profile); }).find("cannot open") != std::string::npos);
  }
}

TEST_CASE("window counts") {
  const DatasetProfile profile = small_profile(at_hour(2020, 1, 3));
  auto series_of = [&](std::size_t len) {
    return std::make_shared<const WeatherSeries>(make_series(profile, at_hour(2020, 1, 1), len));
  };
  CHECK(make_windows(series_of(40), 30, 2, 0).size() == 9);
  CHECK(make_windows(series_of(32), 30, 2, 0).size() == 1);
  CHECK(error_of([&] { make_windows(series_of(31), 30, 2, 0); }).find("length 31") !=
        std::string::npos);

  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 1 + rng.below(10), h = 1 + rng.below(10);
    const std::size_t len = t + h + rng.below(40);
    CHECK(make_windows(series_of(len), t, h, 0).size() == len - t - h + 1);
  }
}

TEST_CASE("window contents: inputs and the future wind speed target") {
  const DatasetProfile profile = small_profile(at_hour(2020, 1, 3));
  const auto series =
      std::make_shared<const WeatherSeries>(make_series(profile, at_hour(2020, 1, 1), 40));
  const WindowSet windows = make_windows(series, 6, 3, 0);
  for (std::size_t k : {std::size_t{0}, std::size_t{7}, windows.size() - 1}) {
    const WeatherInstance inst = windows[k];
    CHECK(inst.x.shape() == Shape{3, 6, 2});
    CHECK(inst.y.shape() == Shape{3});
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t t = 0; t < 6; ++t)
        for (std::size_t v = 0; v < 2; ++v) CHECK(inst.x.at({c, t, v}) == series->at(k + t, c, v));
      CHECK(inst.y.data()[c] == series->at(k + 6 - 1 + 3, c, 0));
    }
    CHECK(inst.start == series->timestamps[k]);
    CHECK(inst.target_time == series->timestamps[k + 8]);
    CHECK(windows.target_row(k) == k + 8);
  }
}

TEST_CASE("chronological split: 100 pre-test windows become 90 train and 10 val") {
  // T = 5, h = 1: windows starting at rows 0..99 have targets before the test
  // boundary at row 105, starts 100..104 straddle it.
  const Timestamp begin = at_hour(2020, 1, 1);
  const DatasetProfile profile = small_profile(begin + hours{105});
  const auto series = std::make_shared<const WeatherSeries>(make_series(profile, begin, 130));
  const SplitWindows split = split_by_date(make_windows(series, 5, 1, 0), profile);
  CHECK(split.train.size() == 90);
  CHECK(split.val.size() == 10);
  CHECK(split.test.size() == 20);

  for (std::size_t k = 0; k < split.train.size(); ++k)
    CHECK(split.train.target_time(k) < split.val.start_time(0) + hours{5});
  CHECK(split.train.target_time(split.train.size() - 1) < split.val.target_time(0));
  CHECK(split.val.target_time(split.val.size() - 1) < profile.test_begin);
  for (std::size_t k = 0; k < split.test.size(); ++k)
    CHECK(split.test.start_time(k) >= profile.test_begin);
}

TEST_CASE("no training target reaches the test period (property)") {
  Rng rng(2);
  const Timestamp begin = at_hour(2020, 1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t t = 2 + rng.below(8), h = 1 + rng.below(6);
    const std::size_t boundary = 40 + rng.below(60);
    const DatasetProfile profile = small_profile(begin + hours{boundary});
    const auto series = std::make_shared<const WeatherSeries>(
        make_series(profile, begin, boundary + t + h + 5 + rng.below(20)));
    const SplitWindows split = split_by_date(make_windows(series, t, h, 0), profile);
    for (const WindowSet* part : {&split.train, &split.val})
      for (std::size_t k = 0; k < part->size(); ++k)
        CHECK(part->target_time(k) < profile.test_begin);
    for (std::size_t k = 0; k < split.test.size(); ++k)
      CHECK(split.test.start_time(k) >= profile.test_begin);
    CHECK(split.train.size() == (split.train.size() + split.val.size()) * 9 / 10);
  }
}

TEST_CASE("Danish protocol: the 2010 window is test, later targets are dropped") {
  const DatasetProfile dk = DatasetProfile::denmark();
  const Timestamp begin = at_hour(2009, 12, 1);
  const std::size_t len = 24 * (31 + 365 + 10);
  const auto series = std::make_shared<const WeatherSeries>(make_series(dk, begin, len));
  const WindowSet all = make_windows(series, 30, 6, dk.wind_speed_index());
  const SplitWindows split = split_by_date(all, dk);

  std::set<Timestamp> test_starts;
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    test_starts.insert(split.test.start_time(k));
    CHECK(split.test.target_time(k) < at_hour(2011, 1, 1));
  }
  CHECK(test_starts.count(at_hour(2010, 6, 1)) == 1);
  CHECK(test_starts.count(at_hour(2010, 12, 31, 23)) == 0);
  CHECK(*test_starts.begin() == at_hour(2010, 1, 1));
  CHECK(split.val.target_time(split.val.size() - 1) < at_hour(2010, 1, 1));
  CHECK(split.train.size() + split.val.size() == 31 * 24 - 30 - 6 + 1);
  CHECK(select_test_windows(all, dk).size() == split.test.size());
}

TEST_CASE("empty splits are an error") {
  const Timestamp begin = at_hour(2020, 1, 1);
  const DatasetProfile profile = small_profile(begin + hours{1000});
  const auto series = std::make_shared<const WeatherSeries>(make_series(profile, begin, 50));
  CHECK(error_of([&] { split_by_date(make_windows(series, 5, 1, 0), profile); })
            .find("empty split") != std::string::npos);
}

TEST_CASE("min-max normalization examples") {
  const DatasetProfile profile = small_profile(at_hour(2020, 1, 3));
  const std::vector<double> raw{0, 5, 10};
  WeatherSeries s = make_series(profile, at_hour(2020, 1, 1), 3,
                                [&](std::size_t t, std::size_t c, std::size_t v) {
                                  return raw[t] * static_cast<double>(c + 1) + static_cast<double>(v);
                                });
  const NormalizationStats stats = fit_normalize(s, 0, 3);
  const WeatherSeries n = apply_normalize(s, stats);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t v = 0; v < 2; ++v) {
      CHECK(n.at(0, c, v) == 0.0);
      CHECK(n.at(1, c, v) == 0.5);
      CHECK(n.at(2, c, v) == 1.0);
    }
  CHECK(stats.normalize(15.0, 0, 0) == 1.5);
  CHECK(stats.normalize(-5.0, 0, 0) == -0.5);
  const WeatherSeries back = denormalize(n, stats);
  CHECK(max_abs_diff(back.values, s.values) < 1e-12);

  s.at(1, 2, 1) = s.at(0, 2, 1);
  s.at(2, 2, 1) = s.at(0, 2, 1);
  CHECK(error_of([&] { fit_normalize(s, 0, 3); }).find("degenerate channel") !=
        std::string::npos);
  CHECK_THROWS_AS(fit_normalize(s, 2, 2), DataError);
}

TEST_CASE("normalization ignores validation and test rows") {
  const Timestamp begin = at_hour(2020, 1, 1);
  const DatasetProfile profile = small_profile(begin + hours{105});
  const WeatherSeries raw = make_series(profile, begin, 130);
  const PreparedData base = prepare_dataset(raw, profile, 5, 1);
  const std::size_t train_end = base.splits.train.target_row(base.splits.train.size() - 1) + 1;

  WeatherSeries perturbed = raw;
  for (std::size_t t = train_end; t < perturbed.length(); ++t)
    for (std::size_t c = 0; c < 3; ++c) perturbed.at(t, c, 0) = 1000.0 + static_cast<double>(t);
  CHECK(prepare_dataset(perturbed, profile, 5, 1).stats == base.stats);

  perturbed = raw;
  perturbed.at(train_end - 1, 0, 0) = 1000.0;
  CHECK_FALSE(prepare_dataset(perturbed, profile, 5, 1).stats == base.stats);

  // Every split reads the normalized series.
  const WeatherInstance inst = base.splits.train[0];
  CHECK(inst.x.at({0, 0, 0}) == base.stats.normalize(raw.at(0, 0, 0), 0, 0));
}

TEST_CASE("single-window CSV input") {
  TempDir dir;
  const DatasetProfile profile = small_profile(at_hour(2020, 1, 3));
  const WeatherSeries s = make_series(profile, at_hour(2020, 1, 1), 40);
  const NormalizationStats stats = fit_normalize(s, 0, 40);

  write_window_csv(s, 3, 8, dir / "w.csv");
  const Tensor x = load_window_csv(dir / "w.csv", profile, stats, 8);
  CHECK(x.shape() == Shape{3, 8, 2});
  CHECK(x.at({1, 2, 1}) == stats.normalize(s.at(5, 1, 1), 1, 1));

  write_window_csv(s, 3, 7, dir / "short.csv");
  CHECK(error_of([&] { load_window_csv(dir / "short.csv", profile, stats, 8); }) ==
        "expected 8 timesteps for city Alpha, got 7");

  auto lines = read_all_lines(dir / "w.csv");
  lines[1] = format_timestamp(s.timestamps[20]) + lines[1].substr(lines[1].find(','));
  write_lines(dir / "gap.csv", lines);
  CHECK(error_of([&] { load_window_csv(dir / "gap.csv", profile, stats, 8); })
            .find("not hourly contiguous") != std::string::npos);
}
