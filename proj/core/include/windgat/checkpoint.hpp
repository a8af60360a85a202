#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "windgat/data.hpp"
#include "windgat/model.hpp"

namespace windgat {

inline constexpr std::string_view kCheckpointFormat = "windgat-ckpt-v1";

// Everything needed to run inference: architecture, trained parameters, the
// dataset profile and the normalization fitted on the training rows.
struct Checkpoint {
  MultistreamGatModel model;
  DatasetProfile profile;
  NormalizationStats stats;
};

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const DatasetProfile& profile);
DatasetProfile profile_from_json(const nlohmann::json& j);
nlohmann::json stats_to_json(const NormalizationStats& stats);
NormalizationStats stats_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const MultistreamGatModel& model,
                                  const DatasetProfile& profile,
                                  const NormalizationStats& stats);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

// Output is a deterministic function of the inputs (byte-identical for equal
// parameters). Throws IoError on write failure.
void save_checkpoint(const std::filesystem::path& path,
                     const MultistreamGatModel& model,
                     const DatasetProfile& profile,
                     const NormalizationStats& stats);
// Throws IoError if unreadable, ConfigError on a malformed document or a
// wrong format tag.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Writes `text` to `path`, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace windgat
