#include "aps/geometry.hpp"

#include <cmath>

namespace aps {

PyramidGrid::PyramidGrid(int image_w, int image_h, std::vector<LevelSpec> levels)
    : image_w_(image_w), image_h_(image_h), levels_(std::move(levels)) {
  if (image_w_ < 1 || image_h_ < 1) throw ConfigError("image dimensions must be >= 1");
  if (levels_.empty()) throw ConfigError("pyramid needs at least one level");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const auto& l = levels_[i];
    if (l.stride < 1 || l.grid_w < 1 || l.grid_h < 1)
      throw ConfigError("level " + std::to_string(l.level_index) + ": stride and grid dims must be >= 1");
    if (i > 0 && (l.level_index <= levels_[i - 1].level_index || l.stride <= levels_[i - 1].stride))
      throw ConfigError("level indices and strides must be strictly increasing");
    if (static_cast<long>(l.grid_w) * l.stride < image_w_ - l.stride ||
        static_cast<long>(l.grid_h) * l.stride < image_h_ - l.stride)
      throw ConfigError("level " + std::to_string(l.level_index) + " grid does not cover the image");
  }
}

PyramidGrid PyramidGrid::from_strides(int image_w, int image_h, std::span<const int> strides) {
  std::vector<LevelSpec> levels;
  levels.reserve(strides.size());
  int index = 0;
  for (int s : strides) {
    if (s < 1) throw ConfigError("stride must be >= 1");
    levels.push_back({index++, s, (image_w + s - 1) / s, (image_h + s - 1) / s});
  }
  return PyramidGrid(image_w, image_h, std::move(levels));
}

const LevelSpec& PyramidGrid::level(int level_index) const {
  for (const auto& l : levels_)
    if (l.level_index == level_index) return l;
  throw OutOfRangeError("no pyramid level with index " + std::to_string(level_index));
}

bool PyramidGrid::has_level(int level_index) const {
  return std::any_of(levels_.begin(), levels_.end(),
                     [&](const LevelSpec& l) { return l.level_index == level_index; });
}

bool PyramidGrid::contains(const PointId& p) const {
  if (!has_level(p.level_index)) return false;
  const auto& l = level(p.level_index);
  return p.cell_x >= 0 && p.cell_x < l.grid_w && p.cell_y >= 0 && p.cell_y < l.grid_h;
}

std::pair<double, double> point_center(const PyramidGrid& grid, const PointId& p) {
  if (!grid.contains(p))
    throw OutOfRangeError("point (" + std::to_string(p.level_index) + ", " + std::to_string(p.cell_x) + ", " +
                          std::to_string(p.cell_y) + ") is outside the pyramid");
  const double s = grid.level(p.level_index).stride;
  return {s * (p.cell_x + 0.5), s * (p.cell_y + 0.5)};
}

std::vector<PointId> points_in_box(const PyramidGrid& grid, int level_index, const Box& box) {
  const auto& l = grid.level(level_index);
  const double s = l.stride;
  // Candidate cell range from the box extent, then exact strict test.
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x_min / s - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y_min / s - 0.5)));
  const int x1 = std::min(l.grid_w - 1, static_cast<int>(std::ceil(box.x_max / s - 0.5)));
  const int y1 = std::min(l.grid_h - 1, static_cast<int>(std::ceil(box.y_max / s - 0.5)));

  std::vector<PointId> out;
  for (int cy = y0; cy <= y1; ++cy) {
    const double y = s * (cy + 0.5);
    for (int cx = x0; cx <= x1; ++cx) {
      const double x = s * (cx + 0.5);
      if (box.strictly_contains(x, y)) out.push_back({level_index, cx, cy});
    }
  }
  return out;
}

} // namespace aps
