#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "aps/error.hpp"
#include "aps/geometry.hpp"

namespace aps {

struct LossPair {
  double cls_loss = 0.0;
  double reg_loss = 0.0;

  double sum() const { return cls_loss + reg_loss; }
  double gap() const { return std::abs(cls_loss - reg_loss); }

  friend bool operator==(const LossPair&, const LossPair&) = default;
};

struct PointLoss {
  PointId point;
  LossPair loss;

  friend bool operator==(const PointLoss&, const PointLoss&) = default;
};

struct LevelLosses {
  int level_index = 0;
  std::vector<PointLoss> points; // row-major, identical to points_in_box

  friend bool operator==(const LevelLosses&, const LevelLosses&) = default;
};

/// Losses of one instance over its in-box points, one entry per pyramid level
/// (levels without in-box points carry an empty list).
struct LossField {
  int instance_id = 0;
  std::vector<LevelLosses> levels;

  /// Loss at a point of this field; throws OutOfRangeError if absent.
  const LossPair& at(const PointId& p) const;
  const LossPair* find(const PointId& p) const;
  std::size_t point_count() const;

  friend bool operator==(const LossField&, const LossField&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct InstanceSpec {
  int id = 0;
  int class_id = 0;
  Box box;
  Point2 cls_hotspot;
  Point2 reg_hotspot;
  double spread = 1.0; // pixels, shared by both task surfaces
  double noise = 0.0;

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

struct ScenarioConfig {
  PyramidGrid grid;
  std::vector<InstanceSpec> instances;
  std::uint64_t seed = 0;

  const InstanceSpec& instance(int id) const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError on invalid boxes, hotspots outside their box,
/// non-positive spreads, negative noise or duplicate ids.
void validate(const ScenarioConfig& cfg);

/// Shape of the synthetic prediction surfaces.
struct SurrogateParams {
  double p_max = 0.95;
  double epsilon = 1e-6;
  /// Per-side growth of the predicted box per pixel of distance to the reg hotspot.
  double box_growth = 0.1;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
};

/// Binary focal loss of predicted probability p for label y.
template <typename Scalar>
Scalar focal_loss(Scalar p, bool y, Scalar alpha = Scalar(0.25), Scalar gamma = Scalar(2)) {
  using std::log;
  using std::log1p;
  using std::pow;
  if (!(p > Scalar(0) && p < Scalar(1)))
    throw DomainError("focal_loss: probability must lie in (0, 1)");
  if (y) return -alpha * pow(Scalar(1) - p, gamma) * log(p);
  return -(Scalar(1) - alpha) * pow(p, gamma) * log1p(-p);
}

template <typename Scalar>
Scalar giou_loss(const BasicBox<Scalar>& pred, const BasicBox<Scalar>& gt) {
  return Scalar(1) - giou(pred, gt);
}

/// Deterministic synthetic loss field for one instance of the scenario:
/// classification confidence peaks at the cls hotspot, the predicted box
/// matches the ground truth at the reg hotspot.
LossField synth_loss_field(const ScenarioConfig& cfg, int instance_id, const SurrogateParams& params = {});

} // namespace aps
