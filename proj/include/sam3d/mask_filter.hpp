#pragma once

#include <cstdint>
#include <vector>

#include "sam3d/segmenter.hpp"

namespace sam3d {

// Inclusive area (pixels) and aspect-ratio bands a vehicle mask must fall in.
struct FilterThresholds {
  double area_lo = 200.0;
  double area_hi = 5000.0;
  double ratio_lo = 1.5;
  double ratio_hi = 4.0;

  void validate() const;
};

std::uint64_t mask_area(const Mask& m);

// Long side over short side of the minimum-area rectangle; +inf when the
// short side is zero.
double mask_aspect_ratio(const Mask& m);

std::vector<Mask> filter_masks(const std::vector<Mask>& masks, const FilterThresholds& t);

}  // namespace sam3d
