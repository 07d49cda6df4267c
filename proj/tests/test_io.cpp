#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>
#include <sstream>

#include "aps/io.hpp"
#include "aps/scenario_gen.hpp"

using namespace aps;

namespace {

std::set<std::size_t> argmax_cells(const GrayImage& img) {
  std::set<std::size_t> out;
  const auto hi = *std::max_element(img.pixels.begin(), img.pixels.end());
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    if (img.pixels[i] == hi) out.insert(i);
  return out;
}

std::set<std::size_t> argmin_inbox_cells(const ScenarioConfig& sc, const LossField& f, int level, bool cls) {
  std::set<std::size_t> out;
  double lo = INFINITY;
  const auto& lvl = f.levels[static_cast<std::size_t>(level)];
  for (const auto& p : lvl.points) lo = std::min(lo, cls ? p.loss.cls_loss : p.loss.reg_loss);
  for (const auto& p : lvl.points)
    if ((cls ? p.loss.cls_loss : p.loss.reg_loss) == lo)
      out.insert(static_cast<std::size_t>(p.point.cell_y) * sc.grid.level(level).grid_w + p.point.cell_x);
  return out;
}

} // namespace

TEST_CASE("scenario JSON round-trips") {
  for (auto preset : {Preset::Aligned, Preset::Misaligned, Preset::Random}) {
    const auto sc = generate_scenario(preset, 77, 4);
    const auto text = dump_json(scenario_to_json(sc));
    CHECK(text.back() == '\n');
    const auto back = scenario_from_json(Json::parse(text));
    CHECK(back == sc);
    CHECK(dump_json(scenario_to_json(back)) == text);
  }
}

TEST_CASE("scenario schema is strict") {
  const Json good = scenario_to_json(generate_scenario(Preset::Aligned, 1, 1));
  CHECK_NOTHROW(scenario_from_json(good));

  Json extra = good;
  extra["comment"] = "x";
  CHECK_THROWS_AS(scenario_from_json(extra), ConfigError);

  Json missing = good;
  missing.erase("seed");
  CHECK_THROWS_AS(scenario_from_json(missing), ConfigError);

  Json inst_extra = good;
  inst_extra["instances"][0]["score"] = 1;
  CHECK_THROWS_AS(scenario_from_json(inst_extra), ConfigError);

  Json short_box = good;
  short_box["instances"][0]["box"] = {1, 2, 3};
  CHECK_THROWS_AS(scenario_from_json(short_box), ConfigError);

  Json text_stride = good;
  text_stride["levels"][0]["stride"] = "8";
  CHECK_THROWS_AS(scenario_from_json(text_stride), ConfigError);

  Json bad_seed = good;
  bad_seed["seed"] = -4;
  CHECK_THROWS_AS(scenario_from_json(bad_seed), ConfigError);

  Json outside = good;
  outside["instances"][0]["cls_hotspot"] = {-100, -100};
  CHECK_THROWS_AS(scenario_from_json(outside), ConfigError);

  CHECK_THROWS_AS(scenario_from_json(Json::array()), ConfigError);
  CHECK_THROWS_AS(read_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("assignment JSON lists positives in cell coordinates") {
  const Assignment a{{{2, {0, 1}, {{0, 3, 4}, {1, 1, 2}}}}, {5}};
  const Json j = assignment_to_json(a);
  CHECK(j["instances"][0]["id"] == 2);
  CHECK(j["instances"][0]["levels"] == Json::array({0, 1}));
  CHECK(j["instances"][0]["positives"][1] == Json{{"level", 1}, {"x", 1}, {"y", 2}});
  CHECK(j["unassigned"] == Json::array({5}));
}

TEST_CASE("PGM encoding") {
  const GrayImage img{3, 2, {0, 10, 20, 30, 40, 255}};
  std::ostringstream out;
  write_pgm(out, img);
  const std::string bytes = out.str();
  CHECK(bytes.rfind("P5\n3 2\n255\n", 0) == 0);
  CHECK(bytes.size() == 11 + 6);
  CHECK(static_cast<unsigned char>(bytes.back()) == 255);

  std::istringstream in(bytes);
  const auto back = read_pgm(in);
  CHECK(back.width == 3);
  CHECK(back.pixels == img.pixels);

  std::istringstream trunc(bytes.substr(0, 14));
  CHECK_THROWS_AS(read_pgm(trunc), ConfigError);
  std::istringstream ascii("P2\n1 1\n255\n0");
  CHECK_THROWS_AS(read_pgm(ascii), ConfigError);
}

TEST_CASE("loss maps scale linearly onto 0..255") {
  const std::array<int, 1> strides{8};
  InstanceSpec inst{0, 0, Box{0, 0, 24, 8}, {4, 4}, {20, 4}, 8, 0};
  const ScenarioConfig sc{PyramidGrid::from_strides(32, 16, strides), {inst}, 0};
  LossField f{0, {{0, {{{0, 0, 0}, {0.0, 1.0}}, {{0, 1, 0}, {0.5, 0.5}}, {{0, 2, 0}, {2.0, 0.0}}}}}};
  const std::array fields{f};
  const auto cls = render_loss_map(sc, fields, 0, LossMapKind::Cls);
  CHECK(cls.width == 4);
  CHECK(cls.height == 2);
  CHECK(cls.at(0, 0) == 0);
  CHECK(cls.at(1, 0) == 64); // 255 * 0.25 = 63.75
  CHECK(cls.at(2, 0) == 255);
  CHECK(cls.at(3, 0) == 0);
  CHECK(cls.at(0, 1) == 0);

  const auto gap = render_loss_map(sc, fields, 0, LossMapKind::Gap);
  CHECK(gap.at(1, 0) == 0);
  CHECK(gap.at(0, 0) == 128); // 255 * 0.5 = 127.5
  CHECK(gap.at(2, 0) == 255);

  LossField flat{0, {{0, {{{0, 0, 0}, {0.3, 0.3}}, {{0, 1, 0}, {0.3, 0.3}}, {{0, 2, 0}, {0.3, 0.3}}}}}};
  const std::array flat_fields{flat};
  const auto zero = render_loss_map(sc, flat_fields, 0, LossMapKind::Reg);
  CHECK(std::all_of(zero.pixels.begin(), zero.pixels.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("assignment maps light exactly the positives") {
  for (auto preset : {Preset::Aligned, Preset::Misaligned, Preset::Random}) {
    const auto sc = generate_scenario(preset, 12, 3);
    const auto fields = scenario_loss_fields(sc);
    const auto a = assign_image(fields);
    std::size_t lit = 0;
    for (const auto& l : sc.grid.levels()) {
      const auto img = render_assignment_map(sc, a, l.level_index);
      CHECK(img.width == l.grid_w);
      for (auto v : img.pixels) {
        CHECK((v == 0 || v == 255));
        lit += v == 255 ? 1 : 0;
      }
    }
    CHECK(lit == a.positive_count());
  }
}

TEST_CASE("rendered hotspots follow the scenario preset") {
  // The lowest-loss in-box cells of each map mark its hotspot.
  const auto aligned = generate_scenario(Preset::Aligned, 3, 1);
  const auto fa = scenario_loss_fields(aligned);
  const auto mis = generate_scenario(Preset::Misaligned, 3, 1);
  const auto fm = scenario_loss_fields(mis);
  const auto img = render_loss_map(aligned, fa, 0, LossMapKind::Cls);
  for (auto cell : argmin_inbox_cells(aligned, fa[0], 0, true)) CHECK(img.pixels[cell] == 0);
  CHECK(argmax_cells(img).size() >= 1);
  CHECK(img.pixels[*argmax_cells(img).begin()] == 255);

  const auto a_cls = argmin_inbox_cells(aligned, fa[0], 0, true);
  const auto a_reg = argmin_inbox_cells(aligned, fa[0], 0, false);
  std::vector<std::size_t> common;
  std::set_intersection(a_cls.begin(), a_cls.end(), a_reg.begin(), a_reg.end(), std::back_inserter(common));
  CHECK_FALSE(common.empty());

  const auto m_cls = argmin_inbox_cells(mis, fm[0], 0, true);
  const auto m_reg = argmin_inbox_cells(mis, fm[0], 0, false);
  std::vector<std::size_t> none;
  std::set_intersection(m_cls.begin(), m_cls.end(), m_reg.begin(), m_reg.end(), std::back_inserter(none));
  CHECK(none.empty());
}

TEST_CASE("text reports") {
  const std::vector<ConvSpec> stack(2, ConvSpec{3, 2, 1, 0});
  const auto text = rf_table_text(rf_table(stack));
  CHECK(text.find('7') != std::string::npos);

  std::vector<NamedScenario> corpus{{"a", generate_scenario(Preset::Random, 1, 2)}};
  const std::array kinds{AssignerKind::Aps, AssignerKind::Center};
  const auto report = compare_assigners(corpus, kinds);
  const Json j = report_to_json(report);
  CHECK(j.contains("scenarios"));
  CHECK(j.contains("summary"));
  CHECK(j.contains("aps_gap_win_rate"));
  CHECK(report_table(report).find("center") != std::string::npos);
}
