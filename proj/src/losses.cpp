#include "aps/losses.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>

namespace aps {

const LossPair* LossField::find(const PointId& p) const {
  for (const auto& lvl : levels) {
    if (lvl.level_index != p.level_index) continue;
    for (const auto& pl : lvl.points)
      if (pl.point == p) return &pl.loss;
  }
  return nullptr;
}

const LossPair& LossField::at(const PointId& p) const {
  if (const auto* l = find(p)) return *l;
  throw OutOfRangeError("point not in loss field of instance " + std::to_string(instance_id));
}

std::size_t LossField::point_count() const {
  std::size_t n = 0;
  for (const auto& lvl : levels) n += lvl.points.size();
  return n;
}

const InstanceSpec& ScenarioConfig::instance(int id) const {
  for (const auto& inst : instances)
    if (inst.id == id) return inst;
  throw OutOfRangeError("no instance with id " + std::to_string(id));
}

namespace {

bool inside_closed(const Box& b, const Point2& p) {
  return p.x >= b.x_min && p.x <= b.x_max && p.y >= b.y_min && p.y <= b.y_max;
}

// Uniform draw in [-1, 1) from the top 53 bits, independent of the
// standard library's distribution implementation.
double symmetric_unit(std::mt19937_64& rng) {
  return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

} // namespace

void validate(const ScenarioConfig& cfg) {
  std::set<int> ids;
  for (const auto& inst : cfg.instances) {
    const std::string tag = "instance " + std::to_string(inst.id) + ": ";
    if (!ids.insert(inst.id).second) throw ConfigError(tag + "duplicate id");
    if (!inst.box.valid()) throw ConfigError(tag + "degenerate box");
    if (!inside_closed(inst.box, inst.cls_hotspot)) throw ConfigError(tag + "cls hotspot outside box");
    if (!inside_closed(inst.box, inst.reg_hotspot)) throw ConfigError(tag + "reg hotspot outside box");
    if (!(inst.spread > 0.0) || !std::isfinite(inst.spread)) throw ConfigError(tag + "spread must be > 0");
    if (!(inst.noise >= 0.0) || !std::isfinite(inst.noise)) throw ConfigError(tag + "noise must be >= 0");
  }
}

LossField synth_loss_field(const ScenarioConfig& cfg, int instance_id, const SurrogateParams& params) {
  validate(cfg);
  const InstanceSpec& inst = cfg.instance(instance_id);

  const auto seed = static_cast<std::uint64_t>(cfg.seed);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(inst.id)};
  std::mt19937_64 rng(seq);

  const double two_var = 2.0 * inst.spread * inst.spread;
  const double min_side = std::min(inst.box.width(), inst.box.height());

  LossField field{inst.id, {}};
  for (const auto& level : cfg.grid.levels()) {
    LevelLosses out{level.level_index, {}};
    for (const PointId& p : points_in_box(cfg.grid, level.level_index, inst.box)) {
      const auto [x, y] = point_center(cfg.grid, p);
      // Draws happen for every point even at zero noise so fields at different
      // noise levels share one random stream.
      const double u_cls = symmetric_unit(rng);
      const double u_reg = symmetric_unit(rng);

      const double dc2 = (x - inst.cls_hotspot.x) * (x - inst.cls_hotspot.x) +
                         (y - inst.cls_hotspot.y) * (y - inst.cls_hotspot.y);
      double prob = params.p_max * std::exp(-dc2 / two_var) + inst.noise * u_cls;
      prob = std::clamp(prob, params.epsilon, 1.0 - params.epsilon);

      const double dr = std::hypot(x - inst.reg_hotspot.x, y - inst.reg_hotspot.y);
      double grow = params.box_growth * dr + inst.noise * u_reg * min_side;
      grow = std::max(grow, -0.25 * min_side);
      const Box pred{inst.box.x_min - grow, inst.box.y_min - grow, inst.box.x_max + grow, inst.box.y_max + grow};

      const LossPair loss{focal_loss(prob, true, params.focal_alpha, params.focal_gamma),
                          std::max(0.0, giou_loss(pred, inst.box))};
      out.points.push_back({p, loss});
    }
    field.levels.push_back(std::move(out));
  }
  return field;
}

} // namespace aps
