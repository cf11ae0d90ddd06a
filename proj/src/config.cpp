#include "sam3d/config.hpp"

#include <fstream>

#include "sam3d/error.hpp"

namespace sam3d {

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  const PipelineConfig& p = cfg.pipeline;
  nlohmann::ordered_json j;
  j["lx"] = p.grid.range.lx;
  j["ux"] = p.grid.range.ux;
  j["ly"] = p.grid.range.ly;
  j["uy"] = p.grid.range.uy;
  j["sx"] = p.grid.sx;
  j["sy"] = p.grid.sy;
  j["dilation_kernel"] = p.grid.dilation_kernel;
  j["palette"] = cfg.palette_path;
  j["intensity_mode"] = to_string(p.intensity_mode);
  j["prompt_n"] = p.prompt_n;
  j["prune"] = p.prune;
  j["prune_radius"] = p.prune_radius;
  j["multimask"] = p.multimask;
  j["dedup"] = p.dedup;
  j["dedup_iou"] = p.dedup_iou;
  j["area_lo"] = p.thresholds.area_lo;
  j["area_hi"] = p.thresholds.area_hi;
  j["ratio_lo"] = p.thresholds.ratio_lo;
  j["ratio_hi"] = p.thresholds.ratio_hi;
  j["iou_thr"] = cfg.eval.iou_thr;
  j["max_dist"] = cfg.eval.max_dist;
  j["segmenter"] = cfg.segmenter;
  j["endpoint"] = cfg.endpoint;
  j["timeout_s"] = cfg.timeout_s;
  j["poll_ms"] = cfg.poll_ms;
  return j;
}

RunConfig config_from_json(const nlohmann::json& patch, const RunConfig& base) {
  if (!patch.is_object()) throw Error(ErrorKind::kConfigError, "config must be a JSON object");
  nlohmann::ordered_json flat = config_to_json(base);
  for (const auto& [key, value] : patch.items()) {
    if (!flat.contains(key)) throw Error(ErrorKind::kConfigError, "unknown config key '" + key + "'");
    flat[key] = value;
  }
  try {
    RunConfig cfg = base;
    PipelineConfig& p = cfg.pipeline;
    p.grid.range = {flat["lx"].get<double>(), flat["ux"].get<double>(), flat["ly"].get<double>(),
                    flat["uy"].get<double>()};
    p.grid.sx = flat["sx"].get<double>();
    p.grid.sy = flat["sy"].get<double>();
    if (!flat["dilation_kernel"].is_number_integer()) {
      throw Error(ErrorKind::kConfigError, "dilation_kernel must be an integer");
    }
    p.grid.dilation_kernel = flat["dilation_kernel"].get<int>();
    cfg.palette_path = flat["palette"].get<std::string>();
    p.palette = cfg.palette_path.empty() ? Palette::default_ramp() : Palette::load(cfg.palette_path);
    p.intensity_mode = parse_intensity_mode(flat["intensity_mode"].get<std::string>());
    p.prompt_n = flat["prompt_n"].get<int>();
    p.prune = flat["prune"].get<bool>();
    p.prune_radius = flat["prune_radius"].get<int>();
    p.multimask = flat["multimask"].get<bool>();
    p.dedup = flat["dedup"].get<bool>();
    p.dedup_iou = flat["dedup_iou"].get<double>();
    p.thresholds = {flat["area_lo"].get<double>(), flat["area_hi"].get<double>(), flat["ratio_lo"].get<double>(),
                    flat["ratio_hi"].get<double>()};
    cfg.eval = {flat["iou_thr"].get<double>(), flat["max_dist"].get<double>()};
    cfg.segmenter = flat["segmenter"].get<std::string>();
    cfg.endpoint = flat["endpoint"].get<std::string>();
    cfg.timeout_s = flat["timeout_s"].get<double>();
    cfg.poll_ms = flat["poll_ms"].get<int>();

    p.validate();
    if (cfg.segmenter != "oracle" && cfg.segmenter != "external") {
      throw Error(ErrorKind::kConfigError, "segmenter must be 'oracle' or 'external'");
    }
    if (!(cfg.eval.iou_thr >= 0.0 && cfg.eval.iou_thr <= 1.0) || !(cfg.eval.max_dist > 0.0)) {
      throw Error(ErrorKind::kConfigError, "iou_thr must be in [0,1] and max_dist > 0");
    }
    if (!(cfg.timeout_s > 0.0) || cfg.poll_ms <= 0) {
      throw Error(ErrorKind::kConfigError, "timeout_s and poll_ms must be positive");
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIoFailure || e.kind() == ErrorKind::kConfigError) throw;
    throw Error(ErrorKind::kConfigError, e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError, path.string() + ": " + e.what());
  }
  return config_from_json(j, base);
}

void apply_override(nlohmann::ordered_json& flat, const std::string& key, const std::string& value) {
  if (!flat.contains(key)) throw Error(ErrorKind::kConfigError, "unknown config key '" + key + "'");
  auto& slot = flat[key];
  try {
    std::size_t used = 0;
    if (slot.is_boolean()) {
      if (value != "true" && value != "false") throw std::invalid_argument("expected true|false");
      slot = value == "true";
      return;
    }
    if (slot.is_number_integer()) {
      const long v = std::stol(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      slot = v;
      return;
    }
    if (slot.is_number()) {
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      slot = v;
      return;
    }
    slot = value;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kConfigError, "bad value '" + value + "' for " + key + ": " + e.what());
  }
}

}  // namespace sam3d
