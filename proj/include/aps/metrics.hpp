#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aps/assigner.hpp"
#include "aps/baselines.hpp"
#include "aps/losses.hpp"

namespace aps {

/// Mean |cls - reg| over the positives. Throws UndefinedMetricError when
/// positives is empty, OutOfRangeError when a positive is not in the field.
double loss_gap(std::span<const PointId> positives, const LossField& field);

/// Mean cls + reg over the positives; same errors as loss_gap.
double loss_sum(std::span<const PointId> positives, const LossField& field);

enum class AssignerKind { Aps, Center, AllInBox };

std::string to_string(AssignerKind kind);
/// Parses "aps", "center", "all-in-box"; throws ConfigError otherwise.
AssignerKind parse_assigner(std::string_view name);

struct InstanceMetrics {
  int instance_id = 0;
  std::size_t positive_count = 0;
  std::optional<double> loss_gap; // absent when the instance has no positives
  std::optional<double> loss_sum;
};

struct AssignerMetrics {
  AssignerKind assigner = AssignerKind::Aps;
  std::size_t positive_count = 0;
  std::optional<double> mean_loss_gap; // over every positive of the scenario
  std::optional<double> mean_loss_sum;
  std::vector<InstanceMetrics> per_instance;
  /// APS only: mean loss sum of the same number of lowest-loss points drawn
  /// from each instance's candidate pool.
  std::optional<double> pool_min_loss_sum;
};

struct ScenarioReport {
  std::string name;
  std::vector<AssignerMetrics> assigners; // same order as the request; failed ones omitted
  std::vector<std::string> failures;
};

struct AssignerSummary {
  AssignerKind assigner = AssignerKind::Aps;
  std::size_t scenarios_evaluated = 0;
  std::size_t failures = 0;
  std::size_t positive_count = 0;
  std::optional<double> mean_loss_gap; // mean of per-scenario means
  std::optional<double> mean_loss_sum;
};

struct WinRate {
  AssignerKind baseline = AssignerKind::Center;
  std::size_t wins = 0;     // scenarios where APS loss_gap < baseline loss_gap
  std::size_t compared = 0; // scenarios where both gaps are defined
  std::size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(total); }
};

struct AlignmentReport {
  std::vector<ScenarioReport> scenarios;
  std::vector<AssignerSummary> summary;
  std::vector<WinRate> win_rates; // APS against every other requested assigner
};

struct NamedScenario {
  std::string name;
  ScenarioConfig config;
};

struct CompareOptions {
  int k = kDefaultK;
  unsigned threads = 1;
  SurrogateParams surrogate{};
  CenterBaselineConfig center{};
};

/// Metrics of one assignment against the scenario's loss fields.
AssignerMetrics evaluate_assignment(AssignerKind kind, const Assignment& assignment,
                                    std::span<const LossField> fields);

/// Runs one assigner on a scenario with precomputed loss fields.
Assignment run_assigner(AssignerKind kind, const ScenarioConfig& scenario, std::span<const LossField> fields,
                        const CompareOptions& opts);

std::vector<LossField> scenario_loss_fields(const ScenarioConfig& scenario, const SurrogateParams& params = {});

AlignmentReport compare_assigners(std::span<const NamedScenario> corpus, std::span<const AssignerKind> assigners,
                                  const CompareOptions& opts = {});

} // namespace aps
