#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "aps/assigner.hpp"
#include "oracles.hpp"

using namespace aps;

namespace {

PointLoss pl(int level, int x, int y, double cls, double reg) { return {{level, x, y}, {cls, reg}}; }

std::vector<PointId> ids(const std::vector<PointLoss>& v) {
  std::vector<PointId> out;
  for (const auto& p : v) out.push_back(p.point);
  return out;
}

// Level with n points on one row, every point carrying the same loss sum.
LevelLosses flat_level(int level, int n, double loss) {
  LevelLosses l{level, {}};
  for (int i = 0; i < n; ++i) l.points.push_back(pl(level, i, 0, loss / 2, loss / 2));
  return l;
}

LossField shifted(LossField f, double c) {
  for (auto& lvl : f.levels)
    for (auto& p : lvl.points) {
      p.loss.cls_loss += c;
      p.loss.reg_loss += c;
    }
  return f;
}

// Reference assignment of one field, built from the oracles and the GMM.
std::vector<PointId> oracle_positives(const LossField& f, int k) {
  const auto cands = oracle::level_candidates(f.levels, k);
  const auto chosen = oracle::select_levels(cands);
  std::vector<PointLoss> joint;
  for (const auto& lvl : cands)
    if (std::find(chosen.begin(), chosen.end(), lvl.level_index) != chosen.end())
      joint.insert(joint.end(), lvl.points.begin(), lvl.points.end());
  const auto s = oracle::scores(joint);
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] < s[best] || (s[i] == s[best] && row_major_less(joint[i].point, joint[best].point))) best = i;
  std::vector<PointId> out;
  try {
    const auto m = fit_em(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      ArrayX<double> x(1);
      x << s[i];
      if (responsibilities(m, x)(0, 0) > 0.5) out.push_back(joint[i].point);
    }
  } catch (const InsufficientDataError&) {
  } catch (const DegenerateDataError&) {
  }
  if (out.empty()) out.push_back(joint[best].point);
  return out;
}

} // namespace

TEST_CASE("candidate count is K capped by the in-box points") {
  CHECK(candidate_count(9, 20) == 9);
  CHECK(candidate_count(9, 4) == 4);
  CHECK(candidate_count(9, 0) == 0);
  CHECK(candidate_count(1, 5) == 1);
  CHECK_THROWS_AS(candidate_count(0, 5), ContractError);
  CHECK_THROWS_AS(candidate_count(-3, 5), ContractError);
}

TEST_CASE("select_candidates orders by loss sum then row-major") {
  const std::vector<PointLoss> pts{pl(0, 0, 0, 0.5, 0.5), pl(0, 1, 0, 0.7, 0.7), pl(0, 2, 0, 0.2, 0.2)};
  CHECK(ids(select_candidates(pts, 2)) == std::vector<PointId>{{0, 2, 0}, {0, 0, 0}});
  CHECK(select_candidates(pts, 0).empty());
  CHECK(ids(select_candidates(pts, 3)).size() == 3);
  CHECK_THROWS_AS(select_candidates(pts, 4), ContractError);

  const std::vector<PointLoss> tied{pl(0, 1, 1, 0.5, 0.5), pl(0, 0, 1, 0.3, 0.7), pl(0, 3, 0, 0.9, 0.1)};
  CHECK(ids(select_candidates(tied, 2)) == std::vector<PointId>{{0, 3, 0}, {0, 0, 1}});
}

TEST_CASE("select_candidates agrees with the rank oracle") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 300; ++t) {
    const auto f = oracle::random_field(rng, 0, t % 2 == 0);
    for (const auto& lvl : f.levels)
      for (int k : {1, 3, 9, 50}) {
        const auto n = candidate_count(k, lvl.points.size());
        REQUIRE(select_candidates(lvl.points, n) == oracle::select_candidates(lvl.points, n));
      }
  }
}

TEST_CASE("select_levels picks the two lowest means") {
  std::vector<LevelLosses> c;
  const std::array<double, 5> means{0.5, 0.3, 0.9, 0.4, 0.7};
  for (int l = 0; l < 5; ++l) c.push_back(flat_level(l, 3, means[static_cast<std::size_t>(l)]));
  CHECK(select_levels(c) == std::vector<int>{1, 3});

  std::vector<LevelLosses> only{{0, {}}, {1, {}}, flat_level(2, 2, 0.4), {3, {}}};
  CHECK(select_levels(only) == std::vector<int>{2});

  std::vector<LevelLosses> tie{flat_level(0, 2, 0.3), flat_level(1, 4, 0.3), flat_level(2, 1, 0.9)};
  CHECK(select_levels(tie) == std::vector<int>{0, 1});

  std::vector<LevelLosses> three_way{flat_level(0, 1, 0.8), flat_level(1, 1, 0.2), flat_level(2, 1, 0.2),
                                     flat_level(3, 1, 0.2)};
  CHECK(select_levels(three_way) == std::vector<int>{1, 2});

  std::vector<LevelLosses> empty{{0, {}}, {1, {}}};
  CHECK_THROWS_AS(select_levels(empty), NoCandidatesError);
}

TEST_CASE("select_levels agrees with the rank oracle") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 500; ++t) {
    const auto c = oracle::level_candidates(oracle::random_field(rng, 0).levels, 9);
    const auto got = select_levels(c);
    REQUIRE(got == oracle::select_levels(c));
    CHECK(got.size() >= 1);
    CHECK(got.size() <= 2);
  }
}

TEST_CASE("split_gmm takes the low-score cluster") {
  const std::vector<PointLoss> cands{pl(0, 0, 0, 1, 1), pl(0, 1, 0, 1, 1), pl(0, 2, 0, 1, 1), pl(0, 3, 0, 1, 1),
                                     pl(0, 4, 0, 1, 1)};
  ScoreArray<double> s(5);
  s << 0.2, 0.21, 0.8, 0.82, 0.79;
  const auto split = split_gmm(cands, s);
  CHECK(split.positives == std::vector<PointId>{{0, 0, 0}, {0, 1, 0}});
  CHECK(split.negatives.size() == 3);
  CHECK_FALSE(split.fallback);

  ScoreArray<double> one(1);
  one << 0.4;
  const auto single = split_gmm(std::span(cands).first(1), one);
  CHECK(single.fallback);
  CHECK(single.positives == std::vector<PointId>{{0, 0, 0}});

  const std::vector<PointLoss> rev{pl(0, 2, 1, 1, 1), pl(0, 1, 1, 1, 1), pl(0, 3, 0, 1, 1)};
  ScoreArray<double> flat(3);
  flat << 0.5, 0.5, 0.5;
  const auto deg = split_gmm(rev, flat);
  CHECK(deg.fallback);
  CHECK(deg.positives == std::vector<PointId>{{0, 3, 0}});
  CHECK(deg.negatives.size() == 2);

  CHECK_THROWS_AS(split_gmm(cands, one), ContractError);
}

TEST_CASE("assign_instance keeps positives on the cheap level") {
  LossField f{4, {{0, {}}, {1, {}}}};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 0.3);
  for (int i = 0; i < 12; ++i) {
    const double a = u(rng), b = u(rng);
    f.levels[0].points.push_back(pl(0, i % 4, i / 4, a, b));
    f.levels[1].points.push_back(pl(1, i % 4, i / 4, 10 * a, 10 * b));
  }
  const auto r = assign_instance(f);
  CHECK(r.instance_id == 4);
  CHECK(r.chosen_levels == std::vector<int>{0, 1});
  CHECK(r.candidates.size() == 18);
  REQUIRE_FALSE(r.positives.empty());
  for (const auto& p : r.positives) CHECK(p.level_index == 0);
  CHECK(r.positives == oracle_positives(f, 9));
}

TEST_CASE("aligned losses put positives near the shared hotspot") {
  const std::array<int, 3> strides{8, 16, 32};
  const Point2 hot{100, 84};
  InstanceSpec inst{0, 0, Box{32, 32, 176, 144}, hot, hot, 24.0, 0.0};
  const ScenarioConfig cfg{PyramidGrid::from_strides(256, 256, strides), {inst}, 3};
  const auto r = assign_instance(synth_loss_field(cfg, 0));
  REQUIRE_FALSE(r.positives.empty());
  auto dist = [&](const PointId& p) {
    const auto [x, y] = point_center(cfg.grid, p);
    return std::hypot(x - hot.x, y - hot.y);
  };
  double pos = 0, all = 0;
  for (const auto& p : r.positives) pos += dist(p);
  for (const auto& c : r.candidates) all += dist(c.point);
  pos /= static_cast<double>(r.positives.size());
  all /= static_cast<double>(r.candidates.size());
  CHECK(pos < all);
  CHECK(pos < 2 * inst.spread);
}

TEST_CASE("an instance with one in-box point gets that point") {
  LossField f{1, {{0, {pl(0, 3, 2, 0.4, 0.6)}}, {1, {}}}};
  const auto r = assign_instance(f);
  CHECK(r.chosen_levels == std::vector<int>{0});
  CHECK(r.positives == std::vector<PointId>{{0, 3, 2}});
  CHECK(r.gmm_fallback);
  CHECK(r.scores.s_u[0] == 1.0);

  LossField none{2, {{0, {}}}};
  CHECK_THROWS_AS(assign_instance(none), NoCandidatesError);
}

TEST_CASE("assign_instance agrees with the pipeline oracle") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 300; ++t) {
    const auto f = oracle::random_field(rng, t, t % 3 != 0);
    const int k = std::uniform_int_distribution<int>(1, 12)(rng);
    const auto r = assign_instance(f, k);
    REQUIRE(r.positives == oracle_positives(f, k));

    const auto want = oracle::scores(r.candidates);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(r.scores.s[static_cast<Eigen::Index>(i)] - want[i]) < 1e-12);

    CHECK(r.positives.size() + r.negatives.size() == r.candidates.size());
    for (const auto& p : r.positives) {
      CHECK(std::find(r.chosen_levels.begin(), r.chosen_levels.end(), p.level_index) != r.chosen_levels.end());
      CHECK(f.find(p) != nullptr);
    }
    for (int level : r.chosen_levels) {
      const auto n = std::count_if(r.candidates.begin(), r.candidates.end(),
                                   [&](const PointLoss& c) { return c.point.level_index == level; });
      CHECK(n <= k);
    }
  }
}

TEST_CASE("assignment is invariant to a shared loss offset") {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 200; ++t) {
    const auto f = oracle::random_field(rng, 0);
    const auto a = assign_instance(f);
    const auto b = assign_instance(shifted(f, 0.75));
    CHECK(a.chosen_levels == b.chosen_levels);
    CHECK(a.positives == b.positives);
    CHECK(a.negatives == b.negatives);
  }
}

TEST_CASE("assign_image keeps disjoint instances independent") {
  std::mt19937_64 rng(41);
  LossField a = oracle::random_field(rng, 0, false);
  LossField b = oracle::random_field(rng, 1, false);
  // Move b to different cells so the two never share a point.
  for (auto& lvl : b.levels)
    for (auto& p : lvl.points) p.point.cell_x += 100;
  const std::array fields{a, b};
  const auto img = assign_image(fields);
  REQUIRE(img.instances.size() == 2);
  auto sorted = [](std::vector<PointId> v) {
    std::sort(v.begin(), v.end(), [](const PointId& p, const PointId& q) {
      return p.level_index != q.level_index ? p.level_index < q.level_index : row_major_less(p, q);
    });
    return v;
  };
  CHECK(img.instances[0].positives == sorted(assign_instance(a).positives));
  CHECK(img.instances[1].positives == sorted(assign_instance(b).positives));
  CHECK(img.unassigned.empty());
}

TEST_CASE("a contested point goes to the instance with the smaller loss") {
  // Both instances want (0,5,5); instance 1 predicts it better.
  LossField outer{0, {{0, {pl(0, 5, 5, 0.30, 0.30), pl(0, 6, 5, 0.31, 0.31), pl(0, 0, 0, 2.0, 2.0),
                           pl(0, 1, 0, 2.1, 2.1), pl(0, 2, 0, 2.2, 2.2)}}}};
  LossField inner{1, {{0, {pl(0, 5, 5, 0.10, 0.10), pl(0, 5, 6, 0.11, 0.11), pl(0, 9, 9, 3.0, 3.0),
                           pl(0, 9, 8, 3.1, 3.1)}}}};
  const std::array fields{outer, inner};
  const auto img = assign_image(fields);
  const auto* o = img.find(0);
  const auto* i = img.find(1);
  REQUIRE(o);
  REQUIRE(i);
  CHECK(std::find(i->positives.begin(), i->positives.end(), PointId{0, 5, 5}) != i->positives.end());
  CHECK(std::find(o->positives.begin(), o->positives.end(), PointId{0, 5, 5}) == o->positives.end());
  CHECK(o->positives == std::vector<PointId>{{0, 6, 5}});
}

TEST_CASE("an instance losing every contest keeps its best-score point") {
  // The inner instance's only positives are both won by the outer one.
  LossField outer{0, {{0, {pl(0, 1, 1, 0.1, 0.1), pl(0, 2, 1, 0.1, 0.1), pl(0, 3, 1, 0.1, 0.1),
                           pl(0, 7, 7, 3.0, 3.0), pl(0, 8, 7, 3.0, 3.0)}}}};
  LossField inner{1, {{0, {pl(0, 1, 1, 0.5, 0.5), pl(0, 2, 1, 0.6, 0.6), pl(0, 4, 4, 2.5, 2.5),
                           pl(0, 5, 4, 2.6, 2.6)}}}};
  REQUIRE(assign_instance(inner).positives == std::vector<PointId>{{0, 1, 1}, {0, 2, 1}});
  const std::array fields{outer, inner};
  const auto img = assign_image(fields);
  CHECK(img.find(1)->positives == std::vector<PointId>{{0, 1, 1}});
  CHECK(img.find(0)->positives == std::vector<PointId>{{0, 2, 1}, {0, 3, 1}});
}

TEST_CASE("two single-point instances on one point: the lower loss keeps it") {
  LossField a{0, {{0, {pl(0, 2, 2, 0.5, 0.5)}}}};
  LossField b{1, {{0, {pl(0, 2, 2, 0.2, 0.2)}}}};
  const std::array fields{a, b};
  const auto img = assign_image(fields);
  CHECK(img.find(1)->positives == std::vector<PointId>{{0, 2, 2}});
  CHECK(img.find(0)->positives.empty());
}

TEST_CASE("instances without in-box points are reported as unassigned") {
  LossField a{3, {{0, {}}, {1, {}}}};
  LossField b{1, {{0, {pl(0, 0, 0, 0.2, 0.3)}}, {1, {}}}};
  const std::array fields{a, b};
  const auto img = assign_image(fields);
  CHECK(img.unassigned == std::vector<int>{3});
  REQUIRE(img.instances.size() == 1);
  CHECK(img.instances[0].instance_id == 1);
  CHECK(img.positive_count() == 1);
}

TEST_CASE("assign_image never gives a point to two instances") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 200; ++t) {
    std::vector<LossField> fields;
    const int n = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int i = 0; i < n; ++i) fields.push_back(oracle::random_field(rng, i));
    const auto img = assign_image(fields);
    std::vector<PointId> seen;
    for (const auto& inst : img.instances) {
      const auto own = assign_instance(fields[static_cast<std::size_t>(inst.instance_id)]).positives;
      for (const auto& p : inst.positives) {
        CHECK(std::find(seen.begin(), seen.end(), p) == seen.end());
        CHECK(std::find(own.begin(), own.end(), p) != own.end());
        seen.push_back(p);
      }
    }
    CHECK(assign_image(fields).instances.size() == img.instances.size());
  }
}

TEST_CASE("reduce_anchors examples") {
  const std::vector<LossPair> a{{0.3, 0.2}, {0.1, 0.1}, {0.5, 0.4}};
  CHECK(reduce_anchors(a).anchor_index == 1);
  CHECK(reduce_anchors(a).loss == LossPair{0.1, 0.1});
  const std::vector<LossPair> tie{{0.2, 0.2}, {0.1, 0.3}, {0.5, 0.4}};
  CHECK(reduce_anchors(tie).anchor_index == 0);
  CHECK_THROWS_AS(reduce_anchors(std::span<const LossPair>{}), ContractError);

  const std::vector<std::vector<LossPair>> batch{a, tie};
  const auto r = reduce_anchors(batch);
  CHECK(r[0].anchor_index == 1);
  CHECK(r[1].anchor_index == 0);
  const std::vector<std::vector<LossPair>> bad{a, {{0.1, 0.1}}};
  CHECK_THROWS_AS(reduce_anchors(bad), ContractError);
}

TEST_CASE("reduce_anchors agrees with the argmin oracle") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 1000; ++t) {
    std::vector<LossPair> anchors;
    for (int i = 0; i < 3; ++i) anchors.push_back({oracle::quantized(rng, 4), oracle::quantized(rng, 4)});
    REQUIRE(reduce_anchors(anchors).anchor_index == oracle::reduce_anchors(anchors));
  }
}
