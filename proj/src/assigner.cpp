#include "aps/assigner.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace aps {

std::vector<PointLoss> CandidateSet::concatenated() const {
  std::vector<PointLoss> out;
  for (const auto& lvl : per_level) out.insert(out.end(), lvl.points.begin(), lvl.points.end());
  return out;
}

const InstancePositives* Assignment::find(int instance_id) const {
  for (const auto& inst : instances)
    if (inst.instance_id == instance_id) return &inst;
  return nullptr;
}

std::size_t Assignment::positive_count() const {
  std::size_t n = 0;
  for (const auto& inst : instances) n += inst.positives.size();
  return n;
}

std::size_t candidate_count(int k, std::size_t in_box_count) {
  if (k < 1) throw ContractError("candidate_count: K must be >= 1");
  return std::min(static_cast<std::size_t>(k), in_box_count);
}

namespace {

bool loss_then_point_less(const PointLoss& a, const PointLoss& b) {
  const double sa = a.loss.sum();
  const double sb = b.loss.sum();
  if (sa != sb) return sa < sb;
  return row_major_less(a.point, b.point);
}

bool level_then_point_less(const PointId& a, const PointId& b) {
  if (a.level_index != b.level_index) return a.level_index < b.level_index;
  return row_major_less(a, b);
}

std::size_t smallest_score_index(std::span<const PointLoss> candidates, const ScoreArray<double>& s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto si = s[static_cast<Eigen::Index>(i)];
    const auto sb = s[static_cast<Eigen::Index>(best)];
    if (si < sb || (si == sb && row_major_less(candidates[i].point, candidates[best].point))) best = i;
  }
  return best;
}

} // namespace

std::vector<PointLoss> select_candidates(std::span<const PointLoss> level_points, std::size_t n) {
  if (n > level_points.size()) throw ContractError("select_candidates: n exceeds the number of points");
  std::vector<PointLoss> sorted(level_points.begin(), level_points.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n), sorted.end(),
                    loss_then_point_less);
  sorted.resize(n);
  return sorted;
}

std::vector<LevelLosses> level_candidates(const LossField& field, int k) {
  std::vector<LevelLosses> out;
  out.reserve(field.levels.size());
  for (const auto& lvl : field.levels)
    out.push_back({lvl.level_index, select_candidates(lvl.points, candidate_count(k, lvl.points.size()))});
  return out;
}

std::vector<int> select_levels(std::span<const LevelLosses> per_level_candidates) {
  std::vector<std::pair<double, int>> means;
  for (const auto& lvl : per_level_candidates) {
    if (lvl.points.empty()) continue;
    double total = 0.0;
    for (const auto& pl : lvl.points) total += pl.loss.sum();
    means.emplace_back(total / static_cast<double>(lvl.points.size()), lvl.level_index);
  }
  if (means.empty()) throw NoCandidatesError("select_levels: every level is empty");

  std::sort(means.begin(), means.end());
  std::vector<int> chosen;
  for (std::size_t i = 0; i < means.size() && i < static_cast<std::size_t>(kLevelsPerInstance); ++i)
    chosen.push_back(means[i].second);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

AlignScores score_candidates(std::span<const PointLoss> candidates) {
  const auto n = static_cast<Eigen::Index>(candidates.size());
  ScoreArray<double> cls(n), reg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cls[i] = candidates[static_cast<std::size_t>(i)].loss.cls_loss;
    reg[i] = candidates[static_cast<std::size_t>(i)].loss.reg_loss;
  }
  AlignScores out;
  out.s_u = unfitness_scores(cls, reg);
  out.s_m = misalignment_scores(cls, reg);
  out.s = combined_scores(out.s_u, out.s_m);
  return out;
}

GmmSplit split_gmm(std::span<const PointLoss> candidates, const ScoreArray<double>& s, const EmOptions& em) {
  if (candidates.empty()) throw ContractError("split_gmm: no candidates");
  if (static_cast<std::size_t>(s.size()) != candidates.size())
    throw ContractError("split_gmm: score count does not match candidate count");

  GmmSplit out;
  std::vector<bool> positive(candidates.size(), false);
  try {
    const Gmm2<double> model = fit_em(s, em);
    const auto r = responsibilities(model, s);
    for (std::size_t i = 0; i < candidates.size(); ++i) positive[i] = r(static_cast<Eigen::Index>(i), 0) > 0.5;
    if (std::none_of(positive.begin(), positive.end(), [](bool b) { return b; }))
      positive[smallest_score_index(candidates, s)] = true;
  } catch (const InsufficientDataError&) {
    out.fallback = true;
  } catch (const DegenerateDataError&) {
    out.fallback = true;
  }
  if (out.fallback) positive[smallest_score_index(candidates, s)] = true;

  for (std::size_t i = 0; i < candidates.size(); ++i)
    (positive[i] ? out.positives : out.negatives).push_back(candidates[i].point);
  return out;
}

InstanceAssignment assign_instance(const LossField& field, int k) {
  const auto per_level = level_candidates(field, k);

  InstanceAssignment out;
  out.instance_id = field.instance_id;
  try {
    out.chosen_levels = select_levels(per_level);
  } catch (const NoCandidatesError&) {
    throw NoCandidatesError("instance " + std::to_string(field.instance_id) + " has no in-box points");
  }

  CandidateSet set{field.instance_id, {}, out.chosen_levels};
  for (const auto& lvl : per_level)
    if (std::find(out.chosen_levels.begin(), out.chosen_levels.end(), lvl.level_index) != out.chosen_levels.end())
      set.per_level.push_back(lvl);
  out.candidates = set.concatenated();

  out.scores = score_candidates(out.candidates);
  auto split = split_gmm(out.candidates, out.scores.s);
  out.positives = std::move(split.positives);
  out.negatives = std::move(split.negatives);
  out.gmm_fallback = split.fallback;
  return out;
}

namespace {

struct Claimant {
  std::size_t index; // into the per-instance results
  double loss;
  int instance_id;
};

bool claim_wins(const Claimant& a, const Claimant& b) {
  if (a.loss != b.loss) return a.loss < b.loss;
  return a.instance_id < b.instance_id;
}

} // namespace

Assignment assign_image(std::span<const LossField> fields, int k) {
  Assignment out;
  std::vector<InstanceAssignment> results;
  std::vector<const LossField*> result_fields;
  for (const auto& f : fields) {
    try {
      results.push_back(assign_instance(f, k));
      result_fields.push_back(&f);
    } catch (const NoCandidatesError&) {
      out.unassigned.push_back(f.instance_id);
    }
  }
  std::sort(out.unassigned.begin(), out.unassigned.end());

  auto claimant = [&](std::size_t i, const PointId& p) {
    return Claimant{i, result_fields[i]->at(p).sum(), results[i].instance_id};
  };

  std::map<PointId, Claimant, RowMajorLess> owner;
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const auto& p : results[i].positives) {
      const Claimant c = claimant(i, p);
      auto [it, inserted] = owner.try_emplace(p, c);
      if (!inserted && claim_wins(c, it->second)) it->second = c;
    }
  }

  auto owned_count = [&](std::size_t i) {
    return std::count_if(owner.begin(), owner.end(), [&](const auto& kv) { return kv.second.index == i; });
  };
  auto best_score_point = [&](std::size_t i) {
    const auto& r = results[i];
    std::size_t best = 0;
    bool found = false;
    for (std::size_t c = 0; c < r.candidates.size(); ++c) {
      if (std::find(r.positives.begin(), r.positives.end(), r.candidates[c].point) == r.positives.end()) continue;
      const auto sc = r.scores.s[static_cast<Eigen::Index>(c)];
      const auto sb = r.scores.s[static_cast<Eigen::Index>(best)];
      if (!found || sc < sb || (sc == sb && row_major_less(r.candidates[c].point, r.candidates[best].point))) {
        best = c;
        found = true;
      }
    }
    return r.candidates[best].point;
  };

  // An instance stripped of every positive reclaims its best-score point.
  // The holder gives it up if it keeps other positives; otherwise the two
  // contest it by the loss rule and the loser stays empty. Each transfer
  // moves a point to a strictly better claimant, so the loop terminates.
  std::vector<bool> settled(results.size(), false);
  const std::size_t max_rounds = results.size() * results.size() + 1;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    std::map<PointId, Claimant, RowMajorLess> requests;
    std::vector<std::size_t> requesters;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (settled[i] || owned_count(i) > 0) continue;
      const PointId target = best_score_point(i);
      const Claimant c = claimant(i, target);
      auto [it, inserted] = requests.try_emplace(target, c);
      if (!inserted && claim_wins(c, it->second)) it->second = c;
      requesters.push_back(i);
    }
    if (requests.empty()) break;
    for (std::size_t i : requesters) {
      const auto& winner = requests.at(best_score_point(i));
      if (winner.index != i) settled[i] = true; // lost to another empty instance
    }
    for (const auto& [p, c] : requests) {
      Claimant& holder = owner.at(p);
      if (owned_count(holder.index) > 1 || claim_wins(c, holder)) holder = c;
      else settled[c.index] = true;
    }
  }

  std::vector<std::size_t> order(results.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return results[a].instance_id < results[b].instance_id; });
  for (std::size_t i : order) {
    InstancePositives ip{results[i].instance_id, results[i].chosen_levels, {}};
    for (const auto& [p, c] : owner)
      if (c.index == i) ip.positives.push_back(p);
    std::sort(ip.positives.begin(), ip.positives.end(), level_then_point_less);
    out.instances.push_back(std::move(ip));
  }
  return out;
}

AnchorChoice reduce_anchors(std::span<const LossPair> anchor_losses) {
  if (anchor_losses.empty()) throw ContractError("reduce_anchors: empty anchor list");
  AnchorChoice best{anchor_losses[0], 0};
  for (std::size_t a = 1; a < anchor_losses.size(); ++a) {
    if (anchor_losses[a].sum() < best.loss.sum()) best = {anchor_losses[a], static_cast<int>(a)};
  }
  return best;
}

std::vector<AnchorChoice> reduce_anchors(const std::vector<std::vector<LossPair>>& per_point_anchor_losses,
                                         std::size_t anchors_per_point) {
  std::vector<AnchorChoice> out;
  out.reserve(per_point_anchor_losses.size());
  for (const auto& losses : per_point_anchor_losses) {
    if (losses.size() != anchors_per_point)
      throw ContractError("reduce_anchors: expected " + std::to_string(anchors_per_point) + " anchors per point");
    out.push_back(reduce_anchors(losses));
  }
  return out;
}

} // namespace aps
