#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "windgat/attention.hpp"
#include "windgat/checkpoint.hpp"
#include "windgat/config.hpp"
#include "windgat/data.hpp"
#include "windgat/errors.hpp"
#include "windgat/metrics.hpp"
#include "windgat/model.hpp"
#include "windgat/training.hpp"

namespace windgat::cli {

namespace fs = std::filesystem;

namespace {

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct EvaluateArgs {
  std::string config;
  std::string ckpt;
  std::string out;
  std::string dump;
};

struct PredictArgs {
  std::string ckpt;
  std::string window;
};

struct ExportArgs {
  std::string config;
  std::string ckpt;
  std::string out;
  std::optional<std::size_t> instance;
};

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string describe(const DatasetProfile& p) {
  return p.name + " (" + std::to_string(p.cities.size()) + " cities, " +
         std::to_string(p.variables.size()) + " variables)";
}

// The checkpoint must have been trained on the dataset layout the config
// points at, with the same window length and horizon.
void require_compatible(const Checkpoint& ckpt, const RunConfig& cfg) {
  const DatasetProfile& a = ckpt.profile;
  const DatasetProfile& b = cfg.data.profile;
  if (a.cities != b.cities || a.variables != b.variables) {
    throw DataError("profile mismatch: checkpoint was trained on " + describe(a) +
                    " but the config describes " + describe(b));
  }
  const ModelConfig& m = ckpt.model.config();
  if (m.timesteps != cfg.data.timesteps || m.horizon != cfg.data.horizon) {
    throw ConfigError("checkpoint expects timesteps " + std::to_string(m.timesteps) +
                      " and horizon " + std::to_string(m.horizon) +
                      ", config has timesteps " + std::to_string(cfg.data.timesteps) +
                      " and horizon " + std::to_string(cfg.data.horizon));
  }
}

struct TestData {
  std::shared_ptr<const WeatherSeries> raw;
  WindowSet windows;  // over the normalized series
};

// Test windows normalized with the checkpoint's statistics.
TestData load_test_windows(const RunConfig& cfg, const Checkpoint& ckpt) {
  auto raw = std::make_shared<const WeatherSeries>(
      load_csv(cfg.data.files, cfg.data.profile));
  auto normalized =
      std::make_shared<const WeatherSeries>(apply_normalize(*raw, ckpt.stats));
  const WindowSet all = make_windows(normalized, cfg.data.timesteps, cfg.data.horizon,
                                     cfg.data.profile.wind_speed_index());
  WindowSet test = select_test_windows(all, cfg.data.profile);
  if (test.empty()) {
    throw DataError("test split is empty: no window starts on or after " +
                    format_timestamp(cfg.data.profile.test_begin));
  }
  return {std::move(raw), std::move(test)};
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
  RunConfig cfg = load_run_config(args.config);
  if (args.seed) cfg.set_seed(*args.seed);
  const fs::path dir = args.out.empty() ? cfg.output_dir : fs::path(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());

  const DatasetProfile& profile = cfg.data.profile;
  const WeatherSeries raw = load_csv(cfg.data.files, profile);
  const PreparedData data =
      prepare_dataset(raw, profile, cfg.data.timesteps, cfg.data.horizon);
  out << "data: " << raw.length() << " hours, windows train " << data.splits.train.size()
      << " / val " << data.splits.val.size() << " / test " << data.splits.test.size()
      << '\n';

  MultistreamGatModel model(cfg.model);
  std::ofstream log = open_output(dir / "train_log.jsonl");
  const FitResult result =
      fit(model, InstanceView::of(data.splits.train), InstanceView::of(data.splits.val),
          cfg.train, [&](const EpochRecord& r) {
            log << r.to_json().dump() << '\n';
            log.flush();
            out << "epoch " << r.epoch << "  train_mse " << r.train_mse << "  val_mse "
                << r.val_mse << "  (" << std::fixed << std::setprecision(2) << r.seconds
                << " s)" << std::defaultfloat << std::setprecision(6) << '\n';
          });
  if (!log) throw IoError("failed writing training log");
  if (result.diverged) {
    throw NumericError("training diverged at " + result.divergence_message);
  }

  save_checkpoint(dir / "model.ckpt", model, profile, data.stats);
  write_text_file(dir / "norm_stats.json", stats_to_json(data.stats).dump(1) + "\n");
  out << "best epoch " << result.best_epoch << " (val_mse " << result.best_val_mse << ")"
      << (result.stopped_early ? ", stopped early" : "") << '\n';
  out << "wrote " << (dir / "model.ckpt").string() << '\n';
  return kOk;
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  const RunConfig cfg = load_run_config(args.config);
  const Checkpoint ckpt = load_checkpoint(args.ckpt);
  require_compatible(ckpt, cfg);
  const TestData test = load_test_windows(cfg, ckpt);
  const std::size_t n = cfg.data.profile.cities.size();
  const std::size_t wind = cfg.data.profile.wind_speed_index();

  const std::vector<double> normalized =
      predict_all(ckpt.model, InstanceView::of(test.windows));
  std::vector<double> predicted(normalized.size());
  std::vector<double> actual(normalized.size());
  for (std::size_t k = 0; k < test.windows.size(); ++k) {
    const std::size_t row = test.windows.target_row(k);
    for (std::size_t c = 0; c < n; ++c) {
      predicted[k * n + c] = ckpt.stats.denormalize(normalized[k * n + c], c, wind);
      actual[k * n + c] = test.raw->at(row, c, wind);
    }
  }
  const EvalReport report =
      evaluate_predictions(actual, predicted, cfg.data.profile.cities, cfg.data.horizon);
  const std::string text = to_json(report).dump(2) + "\n";
  const fs::path report_path =
      args.out.empty() ? fs::path(args.ckpt).parent_path() / "eval.json" : fs::path(args.out);
  write_text_file(report_path, text);
  out << text;

  if (!args.dump.empty()) {
    std::ostringstream csv;
    csv << "timestamp,city,actual,predicted\n";
    for (std::size_t k = 0; k < test.windows.size(); ++k) {
      const std::string when = format_timestamp(test.windows.target_time(k));
      for (std::size_t c = 0; c < n; ++c) {
        csv << when << ',' << cfg.data.profile.cities[c] << ',' << exact(actual[k * n + c])
            << ',' << exact(predicted[k * n + c]) << '\n';
      }
    }
    write_text_file(args.dump, csv.str());
  }
  return kOk;
}

int cmd_predict(const PredictArgs& args, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(args.ckpt);
  const ModelConfig& m = ckpt.model.config();
  const Tensor x = load_window_csv(args.window, ckpt.profile, ckpt.stats, m.timesteps);
  const Tensor pred = ckpt.model.forward(x).prediction;
  const std::size_t wind = ckpt.profile.wind_speed_index();
  out << std::fixed << std::setprecision(6);
  for (std::size_t c = 0; c < m.cities; ++c) {
    out << ckpt.profile.cities[c] << ": " << ckpt.stats.denormalize(pred.data()[c], c, wind)
        << '\n';
  }
  return kOk;
}

int cmd_export_attention(const ExportArgs& args, std::ostream& out) {
  const RunConfig cfg = load_run_config(args.config);
  const Checkpoint ckpt = load_checkpoint(args.ckpt);
  require_compatible(ckpt, cfg);
  TestData test = load_test_windows(cfg, ckpt);
  WindowSet windows = test.windows;
  if (args.instance) {
    if (*args.instance >= windows.size()) {
      throw ConfigError("--instance " + std::to_string(*args.instance) +
                        " out of range: test split has " +
                        std::to_string(windows.size()) + " windows");
    }
    windows = windows.subset({*args.instance});
  }
  const AttentionReport report =
      collect_attention(ckpt.model, InstanceView::of(windows), cfg.data.profile.cities,
                        cfg.data.profile.variables);
  serialize_report(report, args.out);
  out << "wrote attention for " << report.instances << " test instance"
      << (report.instances == 1 ? "" : "s") << " to " << args.out << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multistream graph attention wind speed forecaster", "windgat"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--config", train_args.config, "Run config JSON")->required();
  train->add_option("--seed", train_args.seed, "Override the config seed");
  train->add_option("--out", train_args.out, "Output directory (default: config output_dir)");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on the test split");
  evaluate->add_option("--config", eval_args.config, "Run config JSON")->required();
  evaluate->add_option("--ckpt", eval_args.ckpt, "Checkpoint file")->required();
  evaluate->add_option("--out", eval_args.out,
                       "Report path (default: eval.json next to the checkpoint)");
  evaluate->add_option("--dump", eval_args.dump,
                       "Write timestamp,city,actual,predicted CSV here");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Forecast from a single input window");
  predict->add_option("--ckpt", predict_args.ckpt, "Checkpoint file")->required();
  predict->add_option("--window", predict_args.window,
                      "CSV with columns timestamp,city,<variables>")
      ->required();

  ExportArgs export_args;
  auto* export_attention =
      app.add_subcommand("export-attention", "Write averaged attention maps as JSON");
  export_attention->add_option("--config", export_args.config, "Run config JSON")->required();
  export_attention->add_option("--ckpt", export_args.ckpt, "Checkpoint file")->required();
  export_attention->add_option("--out", export_args.out, "Output JSON path")->required();
  export_attention->add_option("--instance", export_args.instance,
                               "Use one test window instead of the test-set mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*train) return cmd_train(train_args, out);
    if (*evaluate) return cmd_evaluate(eval_args, out);
    if (*predict) return cmd_predict(predict_args, out);
    if (*export_attention) return cmd_export_attention(export_args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kDataError;
  } catch (const DimensionError& e) {
    err << "shape error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace windgat::cli
