#include "windgat/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "windgat/checkpoint.hpp"
#include "windgat/errors.hpp"

namespace windgat {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(std::string(where) + " must be a JSON object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (std::string_view key : allowed) known = known || item.key() == key;
    if (!known) {
      throw ConfigError("unknown key '" + item.key() + "' in " +
                        std::string(where));
    }
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

DatasetProfile parse_profile(const json& j) {
  if (j.is_string()) return DatasetProfile::builtin(j.get<std::string>());
  reject_unknown(j, "data.profile",
                 {"name", "cities", "variables", "wind_speed_variable",
                  "horizons", "test_begin", "test_end"});
  json full = j;
  if (!full.contains("wind_speed_variable")) full["wind_speed_variable"] = "wind_speed";
  DatasetProfile p = profile_from_json(full);
  if (p.cities.size() < 2) throw ConfigError("profile needs at least 2 cities");
  if (p.variables.empty()) throw ConfigError("profile needs variables");
  if (p.horizons.empty()) throw ConfigError("profile needs horizons");
  return p;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  model.seed = s;
  train.seed = s;
}

RunConfig parse_run_config(const nlohmann::json& j,
                           const std::filesystem::path& base_dir) {
  try {
    reject_unknown(j, "config", {"data", "model", "train", "seed", "output_dir"});
    RunConfig cfg;

    const json& data = j.at("data");
    reject_unknown(data, "data", {"profile", "files", "timesteps", "horizon"});
    cfg.data.profile = parse_profile(data.at("profile"));
    read_opt(data, "timesteps", cfg.data.timesteps);
    cfg.data.horizon = data.at("horizon").get<std::size_t>();
    const DatasetProfile& profile = cfg.data.profile;
    if (!profile.allows_horizon(cfg.data.horizon)) {
      throw ConfigError("horizon " + std::to_string(cfg.data.horizon) +
                        " not in " + profile.horizons_text() + " for profile " +
                        profile.name);
    }
    if (cfg.data.timesteps == 0) throw ConfigError("data.timesteps must be >= 1");
    const json& files = data.at("files");
    if (!files.is_object()) throw ConfigError("data.files must map city -> path");
    for (const auto& item : files.items()) {
      if (std::find(profile.cities.begin(), profile.cities.end(), item.key()) ==
          profile.cities.end()) {
        throw ConfigError("data.files names unknown city '" + item.key() + "'");
      }
    }
    for (const std::string& city : profile.cities) {
      if (!files.contains(city)) {
        throw ConfigError("data.files has no entry for city '" + city + "'");
      }
      std::filesystem::path p = files.at(city).get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::is_regular_file(p)) {
        throw ConfigError("data file for " + city + " not found: " + p.string());
      }
      cfg.data.files.push_back(p);
    }

    cfg.model.cities = profile.cities.size();
    cfg.model.variables = profile.variables.size();
    cfg.model.timesteps = cfg.data.timesteps;
    cfg.model.horizon = cfg.data.horizon;
    if (j.contains("model")) {
      const json& m = j.at("model");
      reject_unknown(m, "model",
                     {"transformed_time", "variable_heads", "scalar_heads",
                      "scalar_group_width", "lstm_hidden"});
      read_opt(m, "transformed_time", cfg.model.transformed_time);
      read_opt(m, "variable_heads", cfg.model.variable_heads);
      read_opt(m, "scalar_heads", cfg.model.scalar_heads);
      read_opt(m, "scalar_group_width", cfg.model.scalar_group_width);
      read_opt(m, "lstm_hidden", cfg.model.lstm_hidden);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      reject_unknown(t, "train",
                     {"epochs", "batch_size", "learning_rate", "beta1", "beta2",
                      "epsilon", "patience", "clip_norm"});
      read_opt(t, "epochs", cfg.train.epochs);
      read_opt(t, "batch_size", cfg.train.batch_size);
      read_opt(t, "learning_rate", cfg.train.learning_rate);
      read_opt(t, "beta1", cfg.train.beta1);
      read_opt(t, "beta2", cfg.train.beta2);
      read_opt(t, "epsilon", cfg.train.epsilon);
      read_opt(t, "patience", cfg.train.patience);
      read_opt(t, "clip_norm", cfg.train.clip_norm);
    }
    std::uint64_t seed = 0;
    read_opt(j, "seed", seed);
    cfg.set_seed(seed);
    if (j.contains("output_dir")) {
      cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;

    cfg.model.validate();
    cfg.train.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " +
                      e.what());
  }
  return parse_run_config(j, path.parent_path());
}

}  // namespace windgat
