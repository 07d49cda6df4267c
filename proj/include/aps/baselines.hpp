#pragma once

#include <limits>
#include <span>
#include <vector>

#include "aps/assigner.hpp"
#include "aps/geometry.hpp"
#include "aps/losses.hpp"

namespace aps {

/// Box sizes in (min_size, max_size] are owned by the level.
struct ScaleRange {
  double min_size = 0.0;
  double max_size = std::numeric_limits<double>::infinity();
};

struct CenterBaselineConfig {
  double radius_in_strides = 1.5;
  std::vector<ScaleRange> scale_ranges; // one per pyramid level, in level order

  /// Ranges (0,64], (64,128], ... with the last level open-ended.
  static CenterBaselineConfig fcos_defaults(std::size_t level_count);
};

void validate(const CenterBaselineConfig& cfg, const PyramidGrid& grid);

struct CenterSamplingResult {
  std::vector<PointId> positives;
  int level_index = -1;
  bool size_out_of_range = false;
};

/// Points on the size-matched level whose centers are inside the box and
/// within radius * stride of the box center (per axis).
CenterSamplingResult center_sampling_assign(const Box& box, const PyramidGrid& grid, const CenterBaselineConfig& cfg);

/// Every in-box point of every level.
std::vector<PointId> all_in_box_assign(const Box& box, const PyramidGrid& grid);

/// Baseline assignments of a whole scenario. A point inside several boxes
/// goes to the instance with the smallest box area, then smallest id.
Assignment center_sampling_image(const ScenarioConfig& scenario, const CenterBaselineConfig& cfg);
Assignment all_in_box_image(const ScenarioConfig& scenario);

} // namespace aps
