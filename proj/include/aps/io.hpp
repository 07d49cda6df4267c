#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aps/assigner.hpp"
#include "aps/losses.hpp"
#include "aps/metrics.hpp"
#include "aps/receptive_field.hpp"

namespace aps {

using Json = nlohmann::json;

// Scenario file:
//   {"image": {"w", "h"},
//    "levels": [{"stride", "grid_w", "grid_h"}, ...],
//    "instances": [{"id", "class", "box": [x_min, y_min, x_max, y_max],
//                   "cls_hotspot": [x, y], "reg_hotspot": [x, y],
//                   "spread", "noise"}, ...],
//    "seed"}
// Every key is required and unknown keys are rejected. Level indices are the
// positions in "levels".

Json scenario_to_json(const ScenarioConfig& cfg);
/// Validates the document against the schema; throws ConfigError.
ScenarioConfig scenario_from_json(const Json& doc);

ScenarioConfig read_scenario(const std::filesystem::path& path);
/// Pretty-printed JSON with a trailing newline.
std::string dump_json(const Json& doc);

// Assignment document:
//   {"instances": [{"id", "levels": [..], "positives": [{"level", "x", "y"}]}],
//    "unassigned": [ids]}
// x and y are grid cell coordinates on the given level.
Json assignment_to_json(const Assignment& a);

Json report_to_json(const AlignmentReport& report);
/// Fixed-width summary table.
std::string report_table(const AlignmentReport& report);

std::string rf_table_text(std::span<const RfRow> rows);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels; // row-major

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

enum class LossMapKind { Cls, Reg, Gap };

/// Loss map of one level. A cell takes the value of the smallest-area box
/// containing it (then smallest id); in-box values map linearly from
/// [min, max] of the map onto [0, 255] with rounding to nearest; cells outside
/// every box and maps with max == min render as 0.
GrayImage render_loss_map(const ScenarioConfig& scenario, std::span<const LossField> fields, int level_index,
                          LossMapKind kind);

/// Positives of the level at 255 on a 0 background.
GrayImage render_assignment_map(const ScenarioConfig& scenario, const Assignment& assignment, int level_index);

/// Binary PGM (P5) with maxval 255.
void write_pgm(std::ostream& out, const GrayImage& image);
GrayImage read_pgm(std::istream& in);

} // namespace aps
