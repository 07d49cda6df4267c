#include "aps/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

namespace aps {

namespace {

template <typename Stat>
double mean_over_positives(std::span<const PointId> positives, const LossField& field, Stat stat) {
  if (positives.empty()) throw UndefinedMetricError("metric over an empty positive set");
  double total = 0.0;
  for (const auto& p : positives) total += stat(field.at(p));
  return total / static_cast<double>(positives.size());
}

// Order-independent mean: values are summed in sorted order.
std::optional<double> stable_mean(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

const LossField& field_for(std::span<const LossField> fields, int instance_id) {
  for (const auto& f : fields)
    if (f.instance_id == instance_id) return f;
  throw OutOfRangeError("no loss field for instance " + std::to_string(instance_id));
}

} // namespace

double loss_gap(std::span<const PointId> positives, const LossField& field) {
  return mean_over_positives(positives, field, [](const LossPair& l) { return l.gap(); });
}

double loss_sum(std::span<const PointId> positives, const LossField& field) {
  return mean_over_positives(positives, field, [](const LossPair& l) { return l.sum(); });
}

std::string to_string(AssignerKind kind) {
  switch (kind) {
  case AssignerKind::Aps: return "aps";
  case AssignerKind::Center: return "center";
  case AssignerKind::AllInBox: return "all-in-box";
  }
  return "unknown";
}

AssignerKind parse_assigner(std::string_view name) {
  if (name == "aps") return AssignerKind::Aps;
  if (name == "center") return AssignerKind::Center;
  if (name == "all-in-box") return AssignerKind::AllInBox;
  throw ConfigError("unknown assigner '" + std::string(name) + "' (expected aps, center or all-in-box)");
}

std::vector<LossField> scenario_loss_fields(const ScenarioConfig& scenario, const SurrogateParams& params) {
  std::vector<LossField> out;
  out.reserve(scenario.instances.size());
  for (const auto& inst : scenario.instances) out.push_back(synth_loss_field(scenario, inst.id, params));
  return out;
}

AssignerMetrics evaluate_assignment(AssignerKind kind, const Assignment& assignment,
                                    std::span<const LossField> fields) {
  AssignerMetrics m;
  m.assigner = kind;
  double gap_total = 0.0;
  double sum_total = 0.0;
  for (const auto& inst : assignment.instances) {
    const LossField& field = field_for(fields, inst.instance_id);
    InstanceMetrics im{inst.instance_id, inst.positives.size(), std::nullopt, std::nullopt};
    if (!inst.positives.empty()) {
      im.loss_gap = loss_gap(inst.positives, field);
      im.loss_sum = loss_sum(inst.positives, field);
      for (const auto& p : inst.positives) {
        gap_total += field.at(p).gap();
        sum_total += field.at(p).sum();
      }
    }
    m.positive_count += inst.positives.size();
    m.per_instance.push_back(im);
  }
  if (m.positive_count > 0) {
    m.mean_loss_gap = gap_total / static_cast<double>(m.positive_count);
    m.mean_loss_sum = sum_total / static_cast<double>(m.positive_count);
  }
  return m;
}

Assignment run_assigner(AssignerKind kind, const ScenarioConfig& scenario, std::span<const LossField> fields,
                        const CompareOptions& opts) {
  switch (kind) {
  case AssignerKind::Aps: return assign_image(fields, opts.k);
  case AssignerKind::Center: {
    const auto cfg = opts.center.scale_ranges.empty()
                         ? CenterBaselineConfig::fcos_defaults(scenario.grid.level_count())
                         : opts.center;
    return center_sampling_image(scenario, cfg);
  }
  case AssignerKind::AllInBox: return all_in_box_image(scenario);
  }
  throw ConfigError("unknown assigner");
}

namespace {

std::optional<double> pool_min_loss_sum(const Assignment& assignment, std::span<const LossField> fields, int k) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& inst : assignment.instances) {
    if (inst.positives.empty()) continue;
    const auto pool = assign_instance(field_for(fields, inst.instance_id), k).candidates;
    std::vector<double> sums;
    for (const auto& c : pool) sums.push_back(c.loss.sum());
    std::sort(sums.begin(), sums.end());
    for (std::size_t i = 0; i < inst.positives.size(); ++i) total += sums[i];
    count += inst.positives.size();
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

ScenarioReport evaluate_scenario(const NamedScenario& sc, std::span<const AssignerKind> assigners,
                                 const CompareOptions& opts) {
  ScenarioReport report{sc.name, {}, {}};
  std::vector<LossField> fields;
  try {
    fields = scenario_loss_fields(sc.config, opts.surrogate);
  } catch (const Error& e) {
    for (auto kind : assigners) report.failures.push_back(to_string(kind) + ": " + e.what());
    return report;
  }
  for (auto kind : assigners) {
    try {
      const Assignment a = run_assigner(kind, sc.config, fields, opts);
      AssignerMetrics m = evaluate_assignment(kind, a, fields);
      if (kind == AssignerKind::Aps) m.pool_min_loss_sum = pool_min_loss_sum(a, fields, opts.k);
      report.assigners.push_back(std::move(m));
    } catch (const Error& e) {
      report.failures.push_back(to_string(kind) + ": " + e.what());
    }
  }
  return report;
}

const AssignerMetrics* metrics_of(const ScenarioReport& r, AssignerKind kind) {
  for (const auto& m : r.assigners)
    if (m.assigner == kind) return &m;
  return nullptr;
}

} // namespace

AlignmentReport compare_assigners(std::span<const NamedScenario> corpus, std::span<const AssignerKind> assigners,
                                  const CompareOptions& opts) {
  if (corpus.empty()) throw ConfigError("compare_assigners: empty corpus");

  AlignmentReport report;
  report.scenarios.resize(corpus.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(corpus.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++)
      report.scenarios[i] = evaluate_scenario(corpus[i], assigners, opts);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto kind : assigners) {
    AssignerSummary s;
    s.assigner = kind;
    std::vector<double> gaps, sums;
    for (const auto& sc : report.scenarios) {
      const auto* m = metrics_of(sc, kind);
      if (!m) {
        ++s.failures;
        continue;
      }
      ++s.scenarios_evaluated;
      s.positive_count += m->positive_count;
      if (m->mean_loss_gap) gaps.push_back(*m->mean_loss_gap);
      if (m->mean_loss_sum) sums.push_back(*m->mean_loss_sum);
    }
    s.mean_loss_gap = stable_mean(std::move(gaps));
    s.mean_loss_sum = stable_mean(std::move(sums));
    report.summary.push_back(s);
  }

  for (auto kind : assigners) {
    if (kind == AssignerKind::Aps) continue;
    WinRate w;
    w.baseline = kind;
    w.total = report.scenarios.size();
    for (const auto& sc : report.scenarios) {
      const auto* aps = metrics_of(sc, AssignerKind::Aps);
      const auto* base = metrics_of(sc, kind);
      if (!aps || !base || !aps->mean_loss_gap || !base->mean_loss_gap) continue;
      ++w.compared;
      if (*aps->mean_loss_gap < *base->mean_loss_gap) ++w.wins;
    }
    report.win_rates.push_back(w);
  }
  return report;
}

} // namespace aps
