#include "windgat/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "windgat/errors.hpp"

namespace windgat {

using nlohmann::json;

nlohmann::json model_config_to_json(const ModelConfig& c) {
  return {{"cities", c.cities},
          {"timesteps", c.timesteps},
          {"variables", c.variables},
          {"transformed_time", c.transformed_time},
          {"variable_heads", c.variable_heads},
          {"scalar_heads", c.scalar_heads},
          {"scalar_group_width", c.scalar_group_width},
          {"lstm_hidden", c.lstm_hidden},
          {"horizon", c.horizon},
          {"seed", c.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.cities = j.at("cities").get<std::size_t>();
  c.timesteps = j.at("timesteps").get<std::size_t>();
  c.variables = j.at("variables").get<std::size_t>();
  c.transformed_time = j.at("transformed_time").get<std::size_t>();
  c.variable_heads = j.at("variable_heads").get<std::size_t>();
  c.scalar_heads = j.at("scalar_heads").get<std::size_t>();
  c.scalar_group_width = j.at("scalar_group_width").get<std::size_t>();
  c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  c.horizon = j.at("horizon").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

nlohmann::json profile_to_json(const DatasetProfile& p) {
  return {{"name", p.name},
          {"cities", p.cities},
          {"variables", p.variables},
          {"wind_speed_variable", p.wind_speed_variable},
          {"horizons", p.horizons},
          {"test_begin", format_timestamp(p.test_begin)},
          {"test_end", p.test_end ? json(format_timestamp(*p.test_end)) : json()}};
}

DatasetProfile profile_from_json(const nlohmann::json& j) {
  DatasetProfile p;
  p.name = j.at("name").get<std::string>();
  p.cities = j.at("cities").get<std::vector<std::string>>();
  p.variables = j.at("variables").get<std::vector<std::string>>();
  p.wind_speed_variable = j.at("wind_speed_variable").get<std::string>();
  p.horizons = j.at("horizons").get<std::vector<std::size_t>>();
  auto parse = [](const json& v, const char* key) {
    const auto t = parse_timestamp(v.get<std::string>());
    if (!t) throw ConfigError(std::string("profile: bad timestamp in ") + key);
    return *t;
  };
  p.test_begin = parse(j.at("test_begin"), "test_begin");
  if (j.contains("test_end") && !j.at("test_end").is_null()) {
    p.test_end = parse(j.at("test_end"), "test_end");
  }
  (void)p.wind_speed_index();
  return p;
}

nlohmann::json stats_to_json(const NormalizationStats& s) {
  return {{"cities", s.cities},
          {"variables", s.variables},
          {"min", s.min},
          {"max", s.max}};
}

NormalizationStats stats_from_json(const nlohmann::json& j) {
  NormalizationStats s;
  s.cities = j.at("cities").get<std::size_t>();
  s.variables = j.at("variables").get<std::size_t>();
  s.min = j.at("min").get<std::vector<double>>();
  s.max = j.at("max").get<std::vector<double>>();
  if (s.min.size() != s.cities * s.variables || s.max.size() != s.min.size()) {
    throw ConfigError("normalization stats have inconsistent sizes");
  }
  return s;
}

nlohmann::json checkpoint_to_json(const MultistreamGatModel& model,
                                  const DatasetProfile& profile,
                                  const NormalizationStats& stats) {
  json params = json::array();
  for (const NamedParameter& p : model.parameters()) {
    params.push_back({{"name", p.name},
                      {"shape", p.tensor.shape()},
                      {"data", p.tensor.to_vector()}});
  }
  return {{"format", kCheckpointFormat},
          {"model", model_config_to_json(model.config())},
          {"profile", profile_to_json(profile)},
          {"normalization", stats_to_json(stats)},
          {"parameters", std::move(params)}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw ConfigError("unsupported checkpoint format '" +
                        j.at("format").get<std::string>() + "'");
    }
    Checkpoint ckpt{MultistreamGatModel(model_config_from_json(j.at("model"))),
                    profile_from_json(j.at("profile")),
                    stats_from_json(j.at("normalization"))};
    std::vector<NamedParameter> params = ckpt.model.parameters();
    const json& stored = j.at("parameters");
    if (stored.size() != params.size()) {
      throw ConfigError("checkpoint holds " + std::to_string(stored.size()) +
                        " tensors, model expects " +
                        std::to_string(params.size()));
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
      const json& entry = stored[k];
      if (entry.at("name").get<std::string>() != params[k].name ||
          entry.at("shape").get<Shape>() != params[k].tensor.shape()) {
        throw ConfigError("checkpoint tensor " + std::to_string(k) + " ('" +
                          entry.at("name").get<std::string>() +
                          "') does not match model parameter '" +
                          params[k].name + "'");
      }
      const auto values = entry.at("data").get<std::vector<double>>();
      auto dst = params[k].tensor.mutable_data();
      if (values.size() != dst.size()) {
        throw ConfigError("checkpoint tensor '" + params[k].name +
                          "' has the wrong number of values");
      }
      std::copy(values.begin(), values.end(), dst.begin());
    }
    const ModelConfig& c = ckpt.model.config();
    if (c.cities != ckpt.profile.cities.size() ||
        c.variables != ckpt.profile.variables.size() ||
        ckpt.stats.cities != c.cities || ckpt.stats.variables != c.variables) {
      throw ConfigError("checkpoint model, profile and stats disagree on shape");
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void save_checkpoint(const std::filesystem::path& path,
                     const MultistreamGatModel& model,
                     const DatasetProfile& profile,
                     const NormalizationStats& stats) {
  write_text_file(path, checkpoint_to_json(model, profile, stats).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " +
                      e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace windgat
