#include "sam3d/prompt_grid.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sam3d/error.hpp"

namespace sam3d {

PromptSet generate_grid(int n, int h, int w) {
  if (n < 1 || h < 1 || w < 1) throw Error(ErrorKind::kBadArgs, "grid size and image dims must be >= 1");
  PromptSet ps;
  ps.grid_n = n;
  ps.prompts.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  const double du = static_cast<double>(h) / n;
  const double dv = static_cast<double>(w) / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) ps.prompts.push_back({(i + 0.5) * du, (j + 0.5) * dv});
  }
  return ps;
}

PixelIndex prompt_pixel(const Prompt& p, int h, int w) {
  return {static_cast<int>(std::clamp<long>(std::lround(p.u), 0, h - 1)),
          static_cast<int>(std::clamp<long>(std::lround(p.v), 0, w - 1))};
}

PromptSet prune_prompts(const PromptSet& ps, const BevImage& img, int radius) {
  if (radius < 0) throw Error(ErrorKind::kBadArgs, "prune radius must be >= 0");
  const int h = img.height();
  const int w = img.width();
  PromptSet out;
  out.grid_n = ps.grid_n;
  for (const Prompt& p : ps.prompts) {
    const PixelIndex px = prompt_pixel(p, h, w);
    bool hit = false;
    for (int r = std::max(0, px.row - radius); !hit && r <= std::min(h - 1, px.row + radius); ++r) {
      for (int c = std::max(0, px.col - radius); c <= std::min(w - 1, px.col + radius); ++c) {
        if (img.active(r, c)) {
          hit = true;
          break;
        }
      }
    }
    if (hit) out.prompts.push_back(p);
  }
  return out;
}

std::string prompts_to_json(const PromptSet& ps) {
  nlohmann::json j;
  j["grid_n"] = ps.grid_n;
  j["prompts"] = nlohmann::json::array();
  for (const Prompt& p : ps.prompts) j["prompts"].push_back({p.u, p.v});
  return j.dump();
}

PromptSet prompts_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    PromptSet ps;
    ps.grid_n = j.at("grid_n").get<int>();
    for (const auto& p : j.at("prompts")) ps.prompts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return ps;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("prompt set JSON: ") + e.what());
  }
}

}  // namespace sam3d
