#include "aps/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace aps {

CenterBaselineConfig CenterBaselineConfig::fcos_defaults(std::size_t level_count) {
  CenterBaselineConfig cfg;
  double lo = 0.0;
  double hi = 64.0;
  for (std::size_t i = 0; i < level_count; ++i) {
    const bool last = i + 1 == level_count;
    cfg.scale_ranges.push_back({lo, last ? std::numeric_limits<double>::infinity() : hi});
    lo = hi;
    hi *= 2.0;
  }
  return cfg;
}

void validate(const CenterBaselineConfig& cfg, const PyramidGrid& grid) {
  if (!(cfg.radius_in_strides > 0.0)) throw ConfigError("center sampling radius must be > 0");
  if (cfg.scale_ranges.size() != grid.level_count())
    throw ConfigError("center sampling needs one scale range per pyramid level");
  if (cfg.scale_ranges.front().min_size != 0.0 || !std::isinf(cfg.scale_ranges.back().max_size))
    throw ConfigError("scale ranges must cover (0, inf)");
  for (std::size_t i = 0; i < cfg.scale_ranges.size(); ++i) {
    const auto& r = cfg.scale_ranges[i];
    if (!(r.min_size < r.max_size)) throw ConfigError("scale range is empty");
    if (i > 0 && r.min_size != cfg.scale_ranges[i - 1].max_size)
      throw ConfigError("scale ranges must be contiguous and non-overlapping");
  }
}

CenterSamplingResult center_sampling_assign(const Box& box, const PyramidGrid& grid, const CenterBaselineConfig& cfg) {
  require_valid(box);
  validate(cfg, grid);

  CenterSamplingResult out;
  const double size = std::max(box.width(), box.height());
  for (std::size_t i = 0; i < cfg.scale_ranges.size(); ++i) {
    if (size > cfg.scale_ranges[i].min_size && size <= cfg.scale_ranges[i].max_size) {
      out.level_index = grid.levels()[i].level_index;
      break;
    }
  }
  if (out.level_index < 0) {
    out.size_out_of_range = true;
    return out;
  }

  const double reach = cfg.radius_in_strides * grid.level(out.level_index).stride;
  const double cx = box.center_x();
  const double cy = box.center_y();
  for (const PointId& p : points_in_box(grid, out.level_index, box)) {
    const auto [x, y] = point_center(grid, p);
    if (std::abs(x - cx) <= reach && std::abs(y - cy) <= reach) out.positives.push_back(p);
  }
  return out;
}

std::vector<PointId> all_in_box_assign(const Box& box, const PyramidGrid& grid) {
  require_valid(box);
  std::vector<PointId> out;
  for (const auto& level : grid.levels()) {
    const auto pts = points_in_box(grid, level.level_index, box);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

namespace {

struct Claim {
  double area;
  int instance_id;

  bool beats(const Claim& o) const {
    if (area != o.area) return area < o.area;
    return instance_id < o.instance_id;
  }
};

Assignment resolve_by_area(const ScenarioConfig& scenario, const std::vector<std::vector<PointId>>& per_instance,
                           const std::vector<std::vector<int>>& levels) {
  std::map<PointId, Claim, RowMajorLess> owner;
  for (std::size_t i = 0; i < scenario.instances.size(); ++i) {
    const Claim c{scenario.instances[i].box.area(), scenario.instances[i].id};
    for (const auto& p : per_instance[i]) {
      auto [it, inserted] = owner.try_emplace(p, c);
      if (!inserted && c.beats(it->second)) it->second = c;
    }
  }

  std::vector<std::size_t> order(scenario.instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scenario.instances[a].id < scenario.instances[b].id; });

  Assignment out;
  for (std::size_t i : order) {
    const int id = scenario.instances[i].id;
    if (per_instance[i].empty()) {
      out.unassigned.push_back(id);
      continue;
    }
    InstancePositives ip{id, levels[i], {}};
    for (const auto& p : per_instance[i])
      if (owner.at(p).instance_id == id) ip.positives.push_back(p);
    out.instances.push_back(std::move(ip));
  }
  return out;
}

} // namespace

Assignment center_sampling_image(const ScenarioConfig& scenario, const CenterBaselineConfig& cfg) {
  std::vector<std::vector<PointId>> positives;
  std::vector<std::vector<int>> levels;
  for (const auto& inst : scenario.instances) {
    auto r = center_sampling_assign(inst.box, scenario.grid, cfg);
    levels.push_back(r.level_index >= 0 ? std::vector<int>{r.level_index} : std::vector<int>{});
    positives.push_back(std::move(r.positives));
  }
  return resolve_by_area(scenario, positives, levels);
}

Assignment all_in_box_image(const ScenarioConfig& scenario) {
  std::vector<std::vector<PointId>> positives;
  std::vector<std::vector<int>> levels;
  for (const auto& inst : scenario.instances) {
    auto pts = all_in_box_assign(inst.box, scenario.grid);
    std::vector<int> lv;
    for (const auto& p : pts)
      if (std::find(lv.begin(), lv.end(), p.level_index) == lv.end()) lv.push_back(p.level_index);
    levels.push_back(std::move(lv));
    positives.push_back(std::move(pts));
  }
  return resolve_by_area(scenario, positives, levels);
}

} // namespace aps
