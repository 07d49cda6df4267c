#include "aps/scenario_gen.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

namespace aps {

Preset parse_preset(std::string_view name) {
  if (name == "aligned") return Preset::Aligned;
  if (name == "misaligned") return Preset::Misaligned;
  if (name == "random") return Preset::Random;
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected aligned, misaligned or random)");
}

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

} // namespace

ScenarioConfig generate_scenario(Preset preset, std::uint64_t seed, int instances, const GeneratorOptions& opts) {
  if (instances < 1) throw ConfigError("scenario needs at least one instance");

  constexpr std::array<int, 5> kStrides{8, 16, 32, 64, 128};
  ScenarioConfig cfg{PyramidGrid::from_strides(opts.image_w, opts.image_h, kStrides), {}, seed};

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5ce7u};
  std::mt19937_64 rng(seq);

  for (int id = 0; id < instances; ++id) {
    const double w = std::round(uniform(rng, opts.min_box, std::min(opts.max_box, double(opts.image_w))));
    const double h = std::round(uniform(rng, opts.min_box, std::min(opts.max_box, double(opts.image_h))));
    const double x0 = std::floor(uniform(rng, 0.0, opts.image_w - w));
    const double y0 = std::floor(uniform(rng, 0.0, opts.image_h - h));
    const Box box{x0, y0, x0 + w, y0 + h};
    const double side = std::min(w, h);

    InstanceSpec inst;
    inst.id = id;
    inst.class_id = static_cast<int>(rng() % 80);
    inst.box = box;
    inst.spread = opts.spread_fraction * side;

    const Point2 center{box.center_x(), box.center_y()};
    switch (preset) {
    case Preset::Aligned:
      inst.cls_hotspot = center;
      inst.reg_hotspot = center;
      inst.noise = 0.0;
      break;
    case Preset::Misaligned: {
      const double ix = opts.corner_inset * w;
      const double iy = opts.corner_inset * h;
      // Pick one of the two diagonals and which end gets the cls hotspot.
      const auto variant = rng() % 4;
      const bool main_diagonal = variant < 2;
      const Point2 a{x0 + ix, main_diagonal ? y0 + iy : y0 + h - iy};
      const Point2 b{x0 + w - ix, main_diagonal ? y0 + h - iy : y0 + iy};
      inst.cls_hotspot = variant % 2 == 0 ? a : b;
      inst.reg_hotspot = variant % 2 == 0 ? b : a;
      inst.noise = opts.misaligned_noise;
      break;
    }
    case Preset::Random:
      inst.cls_hotspot = {uniform(rng, box.x_min, box.x_max), uniform(rng, box.y_min, box.y_max)};
      inst.reg_hotspot = {uniform(rng, box.x_min, box.x_max), uniform(rng, box.y_min, box.y_max)};
      inst.spread = uniform(rng, 0.15, 0.4) * side;
      inst.noise = uniform(rng, 0.0, 0.05);
      break;
    }
    cfg.instances.push_back(inst);
  }
  validate(cfg);
  return cfg;
}

} // namespace aps
