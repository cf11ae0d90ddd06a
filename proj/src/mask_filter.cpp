#include "sam3d/mask_filter.hpp"

#include <algorithm>
#include <limits>

#include "sam3d/error.hpp"
#include "sam3d/geometry.hpp"

namespace sam3d {

void FilterThresholds::validate() const {
  if (!(area_lo > 0.0 && area_lo <= area_hi)) {
    throw Error(ErrorKind::kConfigError, "area thresholds need 0 < area_lo <= area_hi");
  }
  if (!(ratio_lo >= 1.0 && ratio_lo <= ratio_hi)) {
    throw Error(ErrorKind::kConfigError, "ratio thresholds need 1 <= ratio_lo <= ratio_hi");
  }
}

std::uint64_t mask_area(const Mask& m) { return m.area(); }

double mask_aspect_ratio(const Mask& m) {
  const RotatedBox2D box = min_area_rect(m);
  const double lo = std::min(box.dx, box.dy);
  const double hi = std::max(box.dx, box.dy);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

std::vector<Mask> filter_masks(const std::vector<Mask>& masks, const FilterThresholds& t) {
  t.validate();
  std::vector<Mask> out;
  for (const Mask& m : masks) {
    const auto area = static_cast<double>(mask_area(m));
    if (area < t.area_lo || area > t.area_hi) continue;
    const double ratio = mask_aspect_ratio(m);
    if (ratio < t.ratio_lo || ratio > t.ratio_hi) continue;
    out.push_back(m);
  }
  return out;
}

}  // namespace sam3d
