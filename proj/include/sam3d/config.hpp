#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sam3d/box_lift.hpp"

namespace sam3d {

struct EvalOptions {
  double iou_thr = 0.7;
  double max_dist = 30.0;
};

struct RunConfig {
  PipelineConfig pipeline;
  std::string palette_path;  // empty: built-in ramp
  EvalOptions eval;
  std::string segmenter = "oracle";  // oracle | external
  std::string endpoint;              // external segmenter exchange directory
  double timeout_s = 120.0;
  int poll_ms = 100;
};

/// Flat key/value view of a RunConfig, keys in a fixed order. This is what
/// `--print-config` emits and what `--config` files contain (any subset).
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

// Overlays the keys present in `patch` onto `base`; unknown keys are a ConfigError.
RunConfig config_from_json(const nlohmann::json& patch, const RunConfig& base = {});

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {});

// Parses `value` with the type of the existing key and applies it.
void apply_override(nlohmann::ordered_json& flat, const std::string& key, const std::string& value);

}  // namespace sam3d
