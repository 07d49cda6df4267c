#include "aps/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace aps {

namespace {

void expect_keys(const Json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; }))
      throw ConfigError(where + ": unknown key '" + k + "'");
  }
  for (const char* key : keys)
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + ": must be finite");
  return d;
}

int integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
    throw ConfigError(where + ": integer out of range");
  return static_cast<int>(i);
}

std::vector<double> numbers(const Json& v, std::size_t n, const std::string& where) {
  if (!v.is_array() || v.size() != n) throw ConfigError(where + ": expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Json point_json(const PointId& p) { return Json{{"level", p.level_index}, {"x", p.cell_x}, {"y", p.cell_y}}; }

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

} // namespace

Json scenario_to_json(const ScenarioConfig& cfg) {
  Json levels = Json::array();
  for (const auto& l : cfg.grid.levels())
    levels.push_back({{"stride", l.stride}, {"grid_w", l.grid_w}, {"grid_h", l.grid_h}});
  Json instances = Json::array();
  for (const auto& inst : cfg.instances) {
    instances.push_back({{"id", inst.id},
                         {"class", inst.class_id},
                         {"box", {inst.box.x_min, inst.box.y_min, inst.box.x_max, inst.box.y_max}},
                         {"cls_hotspot", {inst.cls_hotspot.x, inst.cls_hotspot.y}},
                         {"reg_hotspot", {inst.reg_hotspot.x, inst.reg_hotspot.y}},
                         {"spread", inst.spread},
                         {"noise", inst.noise}});
  }
  return Json{{"image", {{"w", cfg.grid.image_w()}, {"h", cfg.grid.image_h()}}},
              {"levels", levels},
              {"instances", instances},
              {"seed", cfg.seed}};
}

ScenarioConfig scenario_from_json(const Json& doc) {
  expect_keys(doc, {"image", "levels", "instances", "seed"}, "scenario");
  expect_keys(doc["image"], {"w", "h"}, "image");
  const int w = integer(doc["image"]["w"], "image.w");
  const int h = integer(doc["image"]["h"], "image.h");

  if (!doc["levels"].is_array() || doc["levels"].empty()) throw ConfigError("levels: expected a non-empty array");
  std::vector<LevelSpec> levels;
  for (std::size_t i = 0; i < doc["levels"].size(); ++i) {
    const std::string where = "levels[" + std::to_string(i) + "]";
    const Json& l = doc["levels"][i];
    expect_keys(l, {"stride", "grid_w", "grid_h"}, where);
    levels.push_back({static_cast<int>(i), integer(l["stride"], where + ".stride"),
                      integer(l["grid_w"], where + ".grid_w"), integer(l["grid_h"], where + ".grid_h")});
  }

  const Json& seed = doc["seed"];
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    throw ConfigError("seed: expected a non-negative integer");

  ScenarioConfig cfg{PyramidGrid(w, h, std::move(levels)), {}, seed.get<std::uint64_t>()};

  if (!doc["instances"].is_array() || doc["instances"].empty())
    throw ConfigError("instances: expected a non-empty array");
  for (std::size_t i = 0; i < doc["instances"].size(); ++i) {
    const std::string where = "instances[" + std::to_string(i) + "]";
    const Json& j = doc["instances"][i];
    expect_keys(j, {"id", "class", "box", "cls_hotspot", "reg_hotspot", "spread", "noise"}, where);
    InstanceSpec inst;
    inst.id = integer(j["id"], where + ".id");
    inst.class_id = integer(j["class"], where + ".class");
    const auto b = numbers(j["box"], 4, where + ".box");
    inst.box = {b[0], b[1], b[2], b[3]};
    const auto c = numbers(j["cls_hotspot"], 2, where + ".cls_hotspot");
    inst.cls_hotspot = {c[0], c[1]};
    const auto r = numbers(j["reg_hotspot"], 2, where + ".reg_hotspot");
    inst.reg_hotspot = {r[0], r[1]};
    inst.spread = number(j["spread"], where + ".spread");
    inst.noise = number(j["noise"], where + ".noise");
    cfg.instances.push_back(inst);
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  try {
    return scenario_from_json(doc);
  } catch (const Error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

Json assignment_to_json(const Assignment& a) {
  Json instances = Json::array();
  for (const auto& inst : a.instances) {
    Json positives = Json::array();
    for (const auto& p : inst.positives) positives.push_back(point_json(p));
    instances.push_back({{"id", inst.instance_id}, {"levels", inst.levels}, {"positives", positives}});
  }
  return Json{{"instances", instances}, {"unassigned", a.unassigned}};
}

Json report_to_json(const AlignmentReport& report) {
  Json scenarios = Json::array();
  for (const auto& sc : report.scenarios) {
    Json assigners = Json::array();
    for (const auto& m : sc.assigners) {
      Json per_instance = Json::array();
      for (const auto& im : m.per_instance)
        per_instance.push_back({{"id", im.instance_id},
                                {"positive_count", im.positive_count},
                                {"loss_gap", optional_json(im.loss_gap)},
                                {"loss_sum", optional_json(im.loss_sum)}});
      Json entry{{"assigner", to_string(m.assigner)},
                 {"positive_count", m.positive_count},
                 {"mean_loss_gap", optional_json(m.mean_loss_gap)},
                 {"mean_loss_sum", optional_json(m.mean_loss_sum)},
                 {"per_instance", per_instance}};
      if (m.pool_min_loss_sum) entry["pool_min_loss_sum"] = *m.pool_min_loss_sum;
      assigners.push_back(entry);
    }
    scenarios.push_back({{"name", sc.name}, {"assigners", assigners}, {"failures", sc.failures}});
  }
  Json summary = Json::array();
  for (const auto& s : report.summary)
    summary.push_back({{"assigner", to_string(s.assigner)},
                       {"scenarios_evaluated", s.scenarios_evaluated},
                       {"failures", s.failures},
                       {"positive_count", s.positive_count},
                       {"mean_loss_gap", optional_json(s.mean_loss_gap)},
                       {"mean_loss_sum", optional_json(s.mean_loss_sum)}});
  Json wins = Json::array();
  for (const auto& w : report.win_rates)
    wins.push_back({{"baseline", to_string(w.baseline)},
                    {"wins", w.wins},
                    {"compared", w.compared},
                    {"total", w.total},
                    {"rate", w.rate()}});
  return Json{{"scenarios", scenarios}, {"summary", summary}, {"aps_gap_win_rate", wins}};
}

std::string report_table(const AlignmentReport& report) {
  std::ostringstream os;
  auto cell = [&](const std::optional<double>& v) {
    if (v)
      os << std::setw(14) << std::fixed << std::setprecision(6) << *v;
    else
      os << std::setw(14) << "-";
  };
  os << std::left << std::setw(12) << "assigner" << std::right << std::setw(10) << "scenarios" << std::setw(10)
     << "failures" << std::setw(11) << "positives" << std::setw(14) << "loss_gap" << std::setw(14) << "loss_sum"
     << "\n";
  for (const auto& s : report.summary) {
    os << std::left << std::setw(12) << to_string(s.assigner) << std::right << std::setw(10) << s.scenarios_evaluated
       << std::setw(10) << s.failures << std::setw(11) << s.positive_count;
    cell(s.mean_loss_gap);
    cell(s.mean_loss_sum);
    os << "\n";
  }
  for (const auto& w : report.win_rates) {
    os << "aps gap win rate vs " << std::left << std::setw(12) << to_string(w.baseline) << std::right << w.wins << "/"
       << w.total << " (" << std::fixed << std::setprecision(3) << w.rate() << ")\n";
  }
  return os.str();
}

std::string rf_table_text(std::span<const RfRow> rows) {
  std::ostringstream os;
  os << std::setw(6) << "layer" << std::setw(12) << "static_rf" << std::setw(12) << "min_rf" << std::setw(12)
     << "max_rf" << std::setw(10) << "jump" << "\n";
  for (const auto& r : rows) {
    os << std::setw(6) << r.layer << std::setw(12) << r.static_rf << std::setw(12) << r.min_rf << std::setw(12)
       << r.max_rf << std::setw(10) << r.jump << "\n";
  }
  return os.str();
}

namespace {

// Index of the scenario instance owning a cell: smallest box area, then id.
std::vector<int> owner_map(const ScenarioConfig& scenario, const LevelSpec& level) {
  std::vector<int> owner(static_cast<std::size_t>(level.grid_w) * level.grid_h, -1);
  for (std::size_t i = 0; i < scenario.instances.size(); ++i) {
    const auto& inst = scenario.instances[i];
    for (const auto& p : points_in_box(scenario.grid, level.level_index, inst.box)) {
      int& o = owner[static_cast<std::size_t>(p.cell_y) * level.grid_w + p.cell_x];
      if (o < 0) {
        o = static_cast<int>(i);
        continue;
      }
      const auto& cur = scenario.instances[static_cast<std::size_t>(o)];
      if (inst.box.area() < cur.box.area() || (inst.box.area() == cur.box.area() && inst.id < cur.id))
        o = static_cast<int>(i);
    }
  }
  return owner;
}

} // namespace

GrayImage render_loss_map(const ScenarioConfig& scenario, std::span<const LossField> fields, int level_index,
                          LossMapKind kind) {
  const LevelSpec& level = scenario.grid.level(level_index);
  const auto owner = owner_map(scenario, level);

  std::vector<double> values(owner.size(), 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int cy = 0; cy < level.grid_h; ++cy) {
    for (int cx = 0; cx < level.grid_w; ++cx) {
      const std::size_t idx = static_cast<std::size_t>(cy) * level.grid_w + cx;
      if (owner[idx] < 0) continue;
      const int id = scenario.instances[static_cast<std::size_t>(owner[idx])].id;
      const auto it = std::find_if(fields.begin(), fields.end(), [&](const LossField& f) { return f.instance_id == id; });
      if (it == fields.end()) throw OutOfRangeError("no loss field for instance " + std::to_string(id));
      const LossPair& l = it->at({level_index, cx, cy});
      const double v = kind == LossMapKind::Cls ? l.cls_loss : kind == LossMapKind::Reg ? l.reg_loss : l.gap();
      values[idx] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }

  GrayImage img{level.grid_w, level.grid_h, std::vector<std::uint8_t>(owner.size(), 0)};
  if (!(hi > lo)) return img;
  for (std::size_t i = 0; i < owner.size(); ++i) {
    if (owner[i] < 0) continue;
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (values[i] - lo) / (hi - lo)));
  }
  return img;
}

GrayImage render_assignment_map(const ScenarioConfig& scenario, const Assignment& assignment, int level_index) {
  const LevelSpec& level = scenario.grid.level(level_index);
  GrayImage img{level.grid_w, level.grid_h,
                std::vector<std::uint8_t>(static_cast<std::size_t>(level.grid_w) * level.grid_h, 0)};
  for (const auto& inst : assignment.instances)
    for (const auto& p : inst.positives)
      if (p.level_index == level_index) img.pixels[static_cast<std::size_t>(p.cell_y) * level.grid_w + p.cell_x] = 255;
  return img;
}

void write_pgm(std::ostream& out, const GrayImage& image) {
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

GrayImage read_pgm(std::istream& in) {
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (!in || magic != "P5" || w < 1 || h < 1 || maxval != 255) throw ConfigError("not an 8-bit binary PGM");
  in.get(); // single whitespace after the header
  GrayImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) throw ConfigError("truncated PGM data");
  return img;
}

} // namespace aps
