#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aps/gmm1d.hpp"
#include "aps/losses.hpp"
#include "aps/scores.hpp"

namespace aps {

inline constexpr int kDefaultK = 9;
inline constexpr int kLevelsPerInstance = 2;

/// Candidates of the chosen levels, concatenated in ascending level order.
struct CandidateSet {
  int instance_id = 0;
  std::vector<LevelLosses> per_level; // only the chosen levels
  std::vector<int> chosen_levels;

  std::vector<PointLoss> concatenated() const;
};

struct AlignScores {
  ScoreArray<double> s_u;
  ScoreArray<double> s_m;
  ScoreArray<double> s;
};

struct GmmSplit {
  std::vector<PointId> positives;
  std::vector<PointId> negatives;
  bool fallback = false; // GMM could not be fitted; smallest-s candidate taken
};

struct InstanceAssignment {
  int instance_id = 0;
  std::vector<int> chosen_levels;
  std::vector<PointLoss> candidates;
  AlignScores scores;
  std::vector<PointId> positives;
  std::vector<PointId> negatives;
  bool gmm_fallback = false;
};

/// Final positives of one instance after cross-instance conflicts.
struct InstancePositives {
  int instance_id = 0;
  std::vector<int> levels;
  std::vector<PointId> positives; // ordered by level, then row-major
};

struct Assignment {
  std::vector<InstancePositives> instances;
  std::vector<int> unassigned; // instances without any in-box point

  const InstancePositives* find(int instance_id) const;
  std::size_t positive_count() const;
};

/// Number of candidates kept on a level: K capped by the in-box points.
std::size_t candidate_count(int k, std::size_t in_box_count);

/// The n entries with smallest cls+reg loss, ordered by that sum and then
/// row-major point order.
std::vector<PointLoss> select_candidates(std::span<const PointLoss> level_points, std::size_t n);

/// Per level, candidates = select_candidates(in-box points, candidate_count(K, |in-box|)).
std::vector<LevelLosses> level_candidates(const LossField& field, int k);

/// Up to two non-empty levels with the smallest mean candidate loss, returned
/// in ascending level order. Ties go to the lower level index.
std::vector<int> select_levels(std::span<const LevelLosses> per_level_candidates);

AlignScores score_candidates(std::span<const PointLoss> candidates);

/// Two-cluster split of the candidate scores; the low-mean cluster is positive.
GmmSplit split_gmm(std::span<const PointLoss> candidates, const ScoreArray<double>& s,
                   const EmOptions& em = {});

InstanceAssignment assign_instance(const LossField& field, int k = kDefaultK);

/// Runs assign_instance on every field and resolves points claimed by more
/// than one instance.
Assignment assign_image(std::span<const LossField> fields, int k = kDefaultK);

struct AnchorChoice {
  LossPair loss;
  int anchor_index = 0;
};

/// The anchor with the smallest cls+reg loss; ties go to the lower index.
AnchorChoice reduce_anchors(std::span<const LossPair> anchor_losses);

inline constexpr std::size_t kAnchorsPerPoint = 3;

/// Reduces every point to one anchor; each point must carry exactly
/// anchors_per_point entries.
std::vector<AnchorChoice> reduce_anchors(const std::vector<std::vector<LossPair>>& per_point_anchor_losses,
                                         std::size_t anchors_per_point = kAnchorsPerPoint);

} // namespace aps
