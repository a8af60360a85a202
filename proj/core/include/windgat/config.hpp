#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "windgat/data.hpp"
#include "windgat/model.hpp"
#include "windgat/training.hpp"

namespace windgat {

struct DataConfig {
  DatasetProfile profile;
  std::vector<std::filesystem::path> files;  // one per profile city, in order
  std::size_t timesteps = 30;
  std::size_t horizon = 0;
};

// One JSON document describing a run:
//
//   {
//     "data":  {"profile": "NL" | {custom profile}, "files": {city: path},
//               "timesteps": 30, "horizon": 2},
//     "model": {"transformed_time", "variable_heads", "scalar_heads",
//               "scalar_group_width", "lstm_hidden"},
//     "train": {"epochs", "batch_size", "learning_rate", "beta1", "beta2",
//               "epsilon", "patience", "clip_norm"},
//     "seed": 0,
//     "output_dir": "runs/nl-2h"
//   }
//
// Unknown keys are rejected. Relative paths resolve against the directory
// holding the config file.
struct RunConfig {
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "run";

  // Sets the run seed on both the model initialisation and the shuffle.
  void set_seed(std::uint64_t seed);
};

// Throws ConfigError on malformed documents, unknown keys, horizons outside
// the profile's set, or data files that do not exist.
RunConfig parse_run_config(const nlohmann::json& j,
                           const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace windgat
