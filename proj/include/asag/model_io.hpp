#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "asag/pipeline.hpp"

namespace asag {

// Single-document JSON persistence with base64-packed arrays, explicit shapes,
// a format version, and a whole-file checksum. Loading a saved model yields
// bit-identical predictions.
inline constexpr int kModelFormatVersion = 1;

nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const PipelineModel& model);
PipelineModel model_from_json(const nlohmann::json& j);

void save_model(const PipelineModel& model, const std::string& path);
PipelineModel load_model(const std::string& path);

// Reads either a preset name or a JSON config file.
PipelineConfig load_config(const std::string& preset_or_path);

}  // namespace asag
