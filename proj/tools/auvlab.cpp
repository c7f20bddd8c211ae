#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "auvlab/config.hpp"
#include "auvlab/harness.hpp"
#include "auvlab/metrics.hpp"
#include "auvlab/plot.hpp"
#include "auvlab/stress.hpp"
#include "auvlab/trainer.hpp"

namespace {

void print_metrics(const auvlab::MetricRecord& metrics) {
  const auto row = [](const char* name, const auvlab::MetricStat& s) {
    std::printf("  %-16s %12.6f +- %.6f\n", name, s.mean, s.stddev);
  };
  row("return", metrics.eval_return);
  row("tail distance", metrics.tail_distance);
  row("tracking error", metrics.tracking_error);
  row("lost rate", metrics.lost_rate);
  row("saturation", metrics.saturation);
  row("control cost", metrics.control_cost);
  row("comm quality", metrics.comm_quality);
}

int run_train(const std::string& config_path, long seed, bool seed_given) {
  const auvlab::RunConfig cfg = auvlab::load_run_config(config_path);
  std::vector<long> seeds = seed_given ? std::vector<long>{seed}
                                       : cfg.run.seeds;
  for (long s : seeds) {
    std::printf("training %s / %s, seed %ld, budget %ld\n",
                cfg.run.variant.c_str(), cfg.run.scenario.c_str(), s,
                cfg.run.budget);
    const auvlab::TrainProgress progress = auvlab::train_run(cfg, s);
    std::printf("  %ld steps, %ld updates, %ld evals, best return %.6f\n",
                progress.env_steps, progress.updates, progress.evals,
                progress.best_return);
    std::printf("  run directory: %s\n", progress.run_dir.c_str());
  }
  return 0;
}

int run_eval(const std::string& run_dir, int episodes) {
  const auvlab::LoadedRun run = auvlab::load_run(run_dir);
  const int k = episodes > 0 ? episodes : run.cfg.run.eval_episodes;
  const auto traces = auvlab::eval_traces(auvlab::run_eval_episodes(
      run.cfg, run.policy.actor, static_cast<std::uint64_t>(run.seed), k));
  const auvlab::MetricRecord metrics = auvlab::compute_metrics(traces);

  std::printf("%s / %s, seed %ld, %d episodes\n", run.cfg.run.variant.c_str(),
              run.cfg.run.scenario.c_str(), run.seed, k);
  print_metrics(metrics);

  const auto path = std::filesystem::path(run_dir) / "eval_metrics.csv";
  std::ofstream out(path);
  std::vector<std::string> columns = {"episodes"};
  for (const auto& c : auvlab::metric_column_names()) columns.push_back(c);
  auvlab::detail::write_csv_header(out, columns);
  out << k << ",";
  auvlab::detail::write_csv_values(out, auvlab::metric_column_values(metrics));
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

int run_stress(const std::vector<std::string>& run_dirs,
               const std::vector<std::string>& condition_names, int episodes,
               const std::string& out_dir) {
  std::vector<auvlab::StressCondition> conditions;
  if (condition_names.empty()) {
    conditions = auvlab::all_stress_conditions();
  } else {
    for (const auto& name : condition_names) {
      conditions.push_back(auvlab::parse_condition(name));
    }
  }
  const auto cells = auvlab::stress_eval(run_dirs, conditions, episodes);
  for (const auto& cell : cells) {
    std::printf("%s seed %ld under %s\n", cell.variant.c_str(), cell.seed,
                auvlab::condition_name(cell.condition));
    print_metrics(cell.metrics);
  }
  std::filesystem::create_directories(out_dir);
  const auto base = std::filesystem::path(out_dir);
  auvlab::write_stress_csv(cells, (base / "stress.csv").string());
  auvlab::write_stress_json(cells, (base / "stress.json").string());
  auvlab::write_stress_summary_csv(cells,
                                   (base / "stress_summary.csv").string());
  std::printf("wrote stress tables to %s\n", out_dir.c_str());
  return 0;
}

int run_ablate(const std::string& config_path, const std::string& scenario) {
  auvlab::RunConfig cfg = auvlab::load_run_config(config_path);
  if (!scenario.empty()) cfg.run.scenario = scenario;
  for (const std::string& variant : auvlab::variant_names()) {
    cfg.run.variant = variant;
    auvlab::resolve_run_config(cfg);
    auvlab::validate_run_config(cfg);
    for (long seed : cfg.run.seeds) {
      std::printf("training %s / %s, seed %ld, budget %ld\n", variant.c_str(),
                  cfg.run.scenario.c_str(), seed, cfg.run.budget);
      const auvlab::TrainProgress progress = auvlab::train_run(cfg, seed);
      std::printf("  best return %.6f in %s\n", progress.best_return,
                  progress.run_dir.c_str());
    }
  }
  return 0;
}

int run_validate(const std::string& config_path) {
  try {
    auvlab::load_run_config(config_path);
  } catch (const auvlab::ConfigError& e) {
    std::printf("invalid: %s\n", e.what());
    return 1;
  }
  std::printf("ok: %s\n", config_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Underwater swarm target tracking: training, evaluation, "
               "stress protocol, and plots"};
  app.require_subcommand(1);

  std::string config_path;
  long seed = 0;
  bool seed_given = false;
  auto* train = app.add_subcommand("train", "Train one or all config seeds");
  train->add_option("--config", config_path, "Config file")->required();
  auto* seed_opt = train->add_option("--seed", seed, "Override: single seed");

  std::string run_dir;
  int episodes = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate a trained run");
  eval->add_option("--run", run_dir, "Run directory")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes");

  std::vector<std::string> stress_runs;
  std::vector<std::string> stress_conditions;
  std::string stress_out = ".";
  int stress_episodes = 0;
  auto* stress = app.add_subcommand("stress", "Stress-condition grid");
  stress->add_option("--runs", stress_runs, "Run directories")->required();
  stress->add_option("--conditions", stress_conditions,
                     "Condition names (default: all)");
  stress->add_option("--episodes", stress_episodes, "Episodes per cell");
  stress->add_option("--out", stress_out, "Output directory");

  std::string ablate_config;
  std::string ablate_scenario;
  auto* ablate = app.add_subcommand("ablate", "Train all four variants");
  ablate->add_option("--config", ablate_config, "Config file")->required();
  ablate->add_option("--scenario", ablate_scenario, "Scenario override");

  std::string plot_run_dir;
  std::string plot_out = "plots";
  auto* plot = app.add_subcommand("plot", "Render convergence and trajectory");
  plot->add_option("--run", plot_run_dir, "Run directory")->required();
  plot->add_option("--out", plot_out, "Output directory");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "Check a config file");
  validate->add_option("config", validate_path, "Config file")->required();

  CLI11_PARSE(app, argc, argv);
  seed_given = seed_opt->count() > 0;

  try {
    if (train->parsed()) return run_train(config_path, seed, seed_given);
    if (eval->parsed()) return run_eval(run_dir, episodes);
    if (stress->parsed()) {
      return run_stress(stress_runs, stress_conditions, stress_episodes,
                        stress_out);
    }
    if (ablate->parsed()) return run_ablate(ablate_config, ablate_scenario);
    if (plot->parsed()) {
      auvlab::plot_run(plot_run_dir, plot_out);
      std::printf("wrote plots to %s\n", plot_out.c_str());
      return 0;
    }
    if (validate->parsed()) return run_validate(validate_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
