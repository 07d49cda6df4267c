#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aps/error.hpp"

namespace aps {

/// Axis-aligned box in image pixels, (x_min, y_min) inclusive corner to
/// (x_max, y_max).
template <typename Scalar>
struct BasicBox {
  Scalar x_min{};
  Scalar y_min{};
  Scalar x_max{};
  Scalar y_max{};

  Scalar width() const { return x_max - x_min; }
  Scalar height() const { return y_max - y_min; }
  Scalar area() const { return width() * height(); }
  Scalar center_x() const { return (x_min + x_max) / Scalar(2); }
  Scalar center_y() const { return (y_min + y_max) / Scalar(2); }

  bool valid() const { return x_min < x_max && y_min < y_max; }

  /// Strict interior test; points on the boundary are outside.
  bool strictly_contains(Scalar x, Scalar y) const {
    return x > x_min && x < x_max && y > y_min && y < y_max;
  }

  friend bool operator==(const BasicBox&, const BasicBox&) = default;
};

using Box = BasicBox<double>;

template <typename Scalar>
void require_valid(const BasicBox<Scalar>& b, const char* what = "box") {
  if (!b.valid())
    throw ContractError(std::string(what) + " is degenerate (requires x_min < x_max and y_min < y_max)");
}

struct LevelSpec {
  int level_index = 0;
  int stride = 1;
  int grid_w = 1;
  int grid_h = 1;

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

/// One feature point: a grid cell of one pyramid level.
struct PointId {
  int level_index = 0;
  int cell_x = 0;
  int cell_y = 0;

  friend bool operator==(const PointId&, const PointId&) = default;
};

/// Global deterministic order: row-major cell position, then level index.
inline bool row_major_less(const PointId& a, const PointId& b) {
  if (a.cell_y != b.cell_y) return a.cell_y < b.cell_y;
  if (a.cell_x != b.cell_x) return a.cell_x < b.cell_x;
  return a.level_index < b.level_index;
}

struct RowMajorLess {
  bool operator()(const PointId& a, const PointId& b) const { return row_major_less(a, b); }
};

class PyramidGrid {
public:
  /// Validates level ordering and image coverage; throws ConfigError.
  PyramidGrid(int image_w, int image_h, std::vector<LevelSpec> levels);

  /// Levels sized as ceil(image / stride), indexed 0..n-1.
  static PyramidGrid from_strides(int image_w, int image_h, std::span<const int> strides);

  int image_w() const { return image_w_; }
  int image_h() const { return image_h_; }
  const std::vector<LevelSpec>& levels() const { return levels_; }
  std::size_t level_count() const { return levels_.size(); }

  /// Level with the given level_index; throws OutOfRangeError.
  const LevelSpec& level(int level_index) const;
  bool has_level(int level_index) const;
  bool contains(const PointId& p) const;

  friend bool operator==(const PyramidGrid&, const PyramidGrid&) = default;

private:
  int image_w_;
  int image_h_;
  std::vector<LevelSpec> levels_;
};

/// Anchor-point image coordinates of a cell, at half-stride offset.
std::pair<double, double> point_center(const PyramidGrid& grid, const PointId& p);

/// Points of one level whose centers lie strictly inside the box, row-major.
std::vector<PointId> points_in_box(const PyramidGrid& grid, int level_index, const Box& box);

template <typename Scalar>
Scalar intersection_area(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  const Scalar w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const Scalar h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= Scalar(0) || h <= Scalar(0)) return Scalar(0);
  return w * h;
}

template <typename Scalar>
Scalar iou(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  require_valid(a);
  require_valid(b);
  const Scalar inter = intersection_area(a, b);
  return inter / (a.area() + b.area() - inter);
}

/// Generalized IoU: IoU minus the fraction of the enclosing box not covered
/// by the union.
template <typename Scalar>
Scalar giou(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  require_valid(a);
  require_valid(b);
  const Scalar inter = intersection_area(a, b);
  const Scalar uni = a.area() + b.area() - inter;
  const Scalar enclosing = (std::max(a.x_max, b.x_max) - std::min(a.x_min, b.x_min)) *
                           (std::max(a.y_max, b.y_max) - std::min(a.y_min, b.y_min));
  return inter / uni - (enclosing - uni) / enclosing;
}

} // namespace aps
