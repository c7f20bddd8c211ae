#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "auvlab/harness.hpp"
#include "auvlab/metrics.hpp"
#include "auvlab/trainer.hpp"

namespace auvlab {

inline const std::vector<StressCondition>& all_stress_conditions() {
  static const std::vector<StressCondition> conditions = {
      StressCondition::kNominal,        StressCondition::kFastTarget,
      StressCondition::kFarInit,        StressCondition::kLimitedSensing,
      StressCondition::kCommDegraded,   StressCondition::kCombined};
  return conditions;
}

/// One evaluated grid cell: a trained run under one stress condition.
struct StressCell {
  std::string run_dir;
  std::string variant;
  std::string scenario;
  long seed = 0;
  StressCondition condition = StressCondition::kNominal;
  MetricRecord metrics;
};

/// Evaluates every (run, condition) pair on the runs' fixed evaluation
/// seeds with the deterministic policy mean.  Cells are independent, so
/// the grid runs on the AUVLAB_THREADS worker pool; results land in grid
/// order regardless of scheduling.
inline std::vector<StressCell> stress_eval(
    const std::vector<std::string>& run_dirs,
    const std::vector<StressCondition>& conditions, int episodes = 0) {
  std::vector<LoadedRun> runs;
  runs.reserve(run_dirs.size());
  for (const auto& dir : run_dirs) runs.push_back(load_run(dir));

  const int cells = static_cast<int>(run_dirs.size() * conditions.size());
  std::vector<StressCell> out(cells);
  parallel_for(cells, [&](int cell) {
    const size_t r = cell / conditions.size();
    const LoadedRun& run = runs[r];
    StressCell& result = out[cell];
    result.run_dir = run_dirs[r];
    result.variant = run.cfg.run.variant;
    result.scenario = run.cfg.run.scenario;
    result.seed = run.seed;
    result.condition = conditions[cell % conditions.size()];
    RunConfig cfg = run.cfg;
    cfg.env = apply_stress(cfg.env, result.condition);
    const int k = episodes > 0 ? episodes : cfg.run.eval_episodes;
    result.metrics = compute_metrics(eval_traces(run_eval_episodes(
        cfg, run.policy.actor, static_cast<std::uint64_t>(run.seed), k)));
  });
  return out;
}

inline void write_stress_csv(const std::vector<StressCell>& cells,
                             const std::string& path) {
  std::ofstream out(path);
  std::vector<std::string> columns = {"variant", "scenario", "seed",
                                      "condition"};
  for (const auto& c : metric_column_names()) columns.push_back(c);
  detail::write_csv_header(out, columns);
  for (const StressCell& cell : cells) {
    out << cell.variant << "," << cell.scenario << "," << cell.seed << ","
        << condition_name(cell.condition) << ",";
    detail::write_csv_values(out, metric_column_values(cell.metrics));
  }
}

inline void write_stress_json(const std::vector<StressCell>& cells,
                              const std::string& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const StressCell& cell : cells) {
    nlohmann::json row;
    row["run_dir"] = cell.run_dir;
    row["variant"] = cell.variant;
    row["scenario"] = cell.scenario;
    row["seed"] = cell.seed;
    row["condition"] = condition_name(cell.condition);
    const auto& names = metric_column_names();
    const auto values = metric_column_values(cell.metrics);
    for (size_t i = 0; i < names.size(); ++i) row[names[i]] = values[i];
    rows.push_back(row);
  }
  std::ofstream out(path);
  out << rows.dump(2) << "\n";
}

/// Seed-aggregated view: for each (variant, condition), the mean and
/// stddev across seeds of every per-seed metric mean.
inline void write_stress_summary_csv(const std::vector<StressCell>& cells,
                                     const std::string& path) {
  std::map<std::pair<std::string, std::string>, std::vector<const StressCell*>>
      groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const StressCell& cell : cells) {
    const auto key =
        std::make_pair(cell.variant, std::string(condition_name(cell.condition)));
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&cell);
  }

  std::ofstream out(path);
  std::vector<std::string> columns = {"variant", "condition", "seeds"};
  for (const auto& c : metric_column_names()) columns.push_back(c);
  detail::write_csv_header(out, columns);
  for (const auto& key : order) {
    const auto& members = groups[key];
    std::vector<std::vector<double>> per_seed;
    for (const StressCell* cell : members) {
      const auto values = metric_column_values(cell->metrics);
      std::vector<double> means;
      for (size_t i = 0; i < values.size(); i += 2) means.push_back(values[i]);
      per_seed.push_back(means);
    }
    out << key.first << "," << key.second << "," << members.size() << ",";
    std::vector<double> row;
    for (size_t m = 0; m < per_seed[0].size(); ++m) {
      std::vector<double> xs;
      for (const auto& seed_means : per_seed) xs.push_back(seed_means[m]);
      const MetricStat stat = detail::stat_over(xs);
      row.push_back(stat.mean);
      row.push_back(stat.stddev);
    }
    detail::write_csv_values(out, row);
  }
}

}  // namespace auvlab
