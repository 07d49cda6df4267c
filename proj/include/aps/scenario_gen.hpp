#pragma once

#include <cstdint>
#include <string_view>

#include "aps/losses.hpp"

namespace aps {

enum class Preset { Aligned, Misaligned, Random };

Preset parse_preset(std::string_view name);

struct GeneratorOptions {
  int image_w = 512;
  int image_h = 512;
  double min_box = 48.0;
  double max_box = 256.0;
  /// Hotspot inset from the box corners, as a fraction of the box side.
  double corner_inset = 0.2;
  /// Spread as a fraction of the shorter box side.
  double spread_fraction = 0.25;
  double misaligned_noise = 0.02;
};

/// Deterministic scenario on a 5-level pyramid (strides 8..128):
///  - aligned: both hotspots at the box center, no noise
///  - misaligned: hotspots at opposite inset corners of the box
///  - random: hotspots, spread and noise drawn at random
ScenarioConfig generate_scenario(Preset preset, std::uint64_t seed, int instances,
                                 const GeneratorOptions& opts = {});

} // namespace aps
