#pragma once

#include <string>
#include <vector>

#include "sam3d/bev_raster.hpp"

namespace sam3d {

// Point prompt in fractional pixel coordinates (u = row, v = column).
struct Prompt {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const Prompt&, const Prompt&) = default;
};

struct PromptSet {
  std::vector<Prompt> prompts;
  int grid_n = 0;

  std::size_t size() const { return prompts.size(); }
  friend bool operator==(const PromptSet&, const PromptSet&) = default;
};

// n x n prompts at cell centers, row-major.
PromptSet generate_grid(int n, int h, int w);

// Nearest pixel of a prompt, clamped into the image.
PixelIndex prompt_pixel(const Prompt& p, int h, int w);

/// Keeps prompts with at least one non-black pixel within Chebyshev
/// distance `radius` of their rounded location. Order is preserved.
PromptSet prune_prompts(const PromptSet& ps, const BevImage& img, int radius);

std::string prompts_to_json(const PromptSet& ps);
PromptSet prompts_from_json(const std::string& text);

}  // namespace sam3d
