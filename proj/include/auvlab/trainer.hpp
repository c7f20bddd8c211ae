#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "auvlab/checkpoint.hpp"
#include "auvlab/config.hpp"
#include "auvlab/harness.hpp"
#include "auvlab/metrics.hpp"

namespace auvlab {

inline std::string run_directory_name(const RunConfig& cfg, long seed) {
  return cfg.run.variant + "_" + cfg.run.scenario + "_seed" +
         std::to_string(seed);
}

namespace detail {

inline void write_csv_header(std::ostream& out,
                             const std::vector<std::string>& columns) {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) out << ",";
    out << columns[i];
  }
  out << "\n";
}

inline void write_csv_values(std::ostream& out,
                             const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out << ",";
    out << format_double(values[i]);
  }
  out << "\n";
}

inline void write_diagnostics_line(std::ostream& out, long env_step,
                                   std::uint64_t episode, long t,
                                   const SwarmStepOutcome& outcome) {
  nlohmann::json j;
  j["env_step"] = env_step;
  j["episode"] = episode;
  j["t"] = t;
  j["reward"] = outcome.reward.global;
  j["r_track"] = outcome.reward.r_track;
  j["r_obs"] = outcome.reward.r_obs;
  j["r_sem"] = outcome.reward.r_sem;
  j["cost"] = outcome.reward.cost;
  j["r_coord"] = outcome.reward.r_coord;
  j["r_comm"] = outcome.reward.r_comm;
  j["distances"] = outcome.env.info.distances;
  j["boundary_exits"] = outcome.env.info.boundary_exits;
  j["pitch_clamps"] = outcome.env.info.pitch_clamps;
  out << j.dump() << "\n";
}

}  // namespace detail

inline Checkpoint make_snapshot(const RunConfig& cfg,
                                const PolicyBundle& policy, const Rng& noise,
                                const Rng& shuffle, long env_steps,
                                long updates, std::uint64_t episode_index,
                                bool has_best, double best_return) {
  Checkpoint ck;
  ck.actor_layers = actor_layer_sizes(cfg);
  ck.critic_layers = critic_layer_sizes(cfg);
  ck.n_agents = static_cast<std::uint32_t>(cfg.env.episode.n_agents);
  ck.action_dim = static_cast<std::uint32_t>(action_dim(cfg.action_mode));
  ck.env_steps = static_cast<std::uint64_t>(env_steps);
  ck.updates = static_cast<std::uint64_t>(updates);
  ck.episode_index = episode_index;
  ck.has_best = has_best ? 1 : 0;
  ck.best_return = has_best ? best_return : 0.0;
  ck.actor_params = policy.actor.flatten();
  ck.critic_params = policy.critic.flatten();
  ck.actor_m = policy.actor_opt.m;
  ck.actor_v = policy.actor_opt.v;
  ck.actor_t = static_cast<std::uint64_t>(policy.actor_opt.t);
  ck.critic_m = policy.critic_opt.m;
  ck.critic_v = policy.critic_opt.v;
  ck.critic_t = static_cast<std::uint64_t>(policy.critic_opt.t);
  ck.sample_rng = noise.state();
  ck.update_rng = shuffle.state();
  return ck;
}

struct TrainProgress {
  std::string run_dir;
  long env_steps = 0;
  long updates = 0;
  long evals = 0;
  double best_return = 0.0;
};

/// Trains one seed to the configured step budget.  The run directory
/// receives the resolved config snapshot, the evaluation history CSV,
/// the per-update loss CSV, best/final checkpoints, and (when enabled)
/// per-step reward diagnostics as JSON lines.  A non-finite gradient
/// aborts after dumping the last consistent state to crash.ckpt.
inline TrainProgress train_run(const RunConfig& base, long seed) {
  RunConfig cfg = base;
  cfg.run.seeds = {seed};
  validate_run_config(cfg);

  namespace fs = std::filesystem;
  const fs::path dir =
      fs::path(cfg.run.out_dir) / run_directory_name(cfg, seed);
  fs::create_directories(dir);
  save_run_config(cfg, (dir / "config.ini").string());

  const int n = cfg.env.episode.n_agents;
  const int obs_dim = observation_length(cfg);
  const int act_dim = action_dim(cfg.action_mode);
  const int joint_dim = joint_observation_length(cfg);
  const std::uint64_t run_seed = static_cast<std::uint64_t>(seed);

  Rng init_rng(Rng::derive(run_seed, seed_stream::kActorInit));
  Rng noise_rng(Rng::derive(run_seed, seed_stream::kActionNoise));
  Rng update_rng(Rng::derive(run_seed, seed_stream::kUpdateShuffle));
  PolicyBundle policy = make_policy(cfg, init_rng);

  std::ofstream history(dir / "history.csv");
  std::vector<std::string> history_columns = {"env_steps"};
  for (const auto& c : metric_column_names()) history_columns.push_back(c);
  detail::write_csv_header(history, history_columns);

  std::ofstream updates_csv(dir / "updates.csv");
  detail::write_csv_header(updates_csv,
                           {"env_steps", "update", "actor_loss", "critic_loss",
                            "entropy", "clip_fraction", "approx_kl"});

  std::ofstream diag;
  if (cfg.run.diagnostics) diag.open(dir / "diagnostics.jsonl");

  TrainProgress progress;
  progress.run_dir = dir.string();
  double best_return = -std::numeric_limits<double>::infinity();
  bool has_best = false;
  long next_eval = cfg.run.eval_interval;
  std::uint64_t episode_index = 0;
  SwarmSession session(cfg, train_episode_seed(run_seed, episode_index));
  ++episode_index;
  RolloutBuffer buffer;

  const auto snapshot = [&] {
    return make_snapshot(cfg, policy, noise_rng, update_rng,
                         progress.env_steps, progress.updates, episode_index,
                         has_best, best_return);
  };

  while (progress.env_steps < cfg.run.budget) {
    const int capacity = static_cast<int>(std::min<long>(
        cfg.ppo.rollout_steps, cfg.run.budget - progress.env_steps));
    buffer.reset(capacity, n, obs_dim, act_dim, joint_dim);
    for (int s = 0; s < capacity; ++s) {
      const std::vector<Eigen::VectorXd> obs = session.observations();
      const Eigen::VectorXd joint = session.joint_observation();
      const double value = critic_forward(policy.critic, joint);
      std::vector<ActorSample> samples(n);
      std::vector<Eigen::VectorXd> commanded(n);
      for (int i = 0; i < n; ++i) {
        samples[i] = actor_forward(policy.actor, obs[i], noise_rng);
        commanded[i] = samples[i].action;
      }
      const SwarmStepOutcome outcome = session.advance(commanded);
      buffer.push(obs, samples, joint, value, outcome.reward.global,
                  outcome.env.done);
      ++progress.env_steps;
      if (diag.is_open()) {
        detail::write_diagnostics_line(diag, progress.env_steps,
                                       episode_index - 1, session.world().t,
                                       outcome);
      }
      if (outcome.env.done) {
        session = SwarmSession(cfg, train_episode_seed(run_seed,
                                                       episode_index));
        ++episode_index;
      }
    }
    buffer.bootstrap_value =
        critic_forward(policy.critic, session.joint_observation());
    LossReport report;
    try {
      report = ppo_update(buffer, policy.actor, policy.critic,
                          policy.actor_opt, policy.critic_opt, cfg.ppo,
                          update_rng);
    } catch (const NonFiniteGradient&) {
      save_checkpoint(snapshot(), (dir / "crash.ckpt").string());
      throw;
    }
    ++progress.updates;
    updates_csv << progress.env_steps << "," << progress.updates << ",";
    detail::write_csv_values(updates_csv,
                             {report.actor_loss, report.critic_loss,
                              report.entropy, report.clip_fraction,
                              report.approx_kl});

    while (progress.env_steps >= next_eval) {
      const auto episodes = run_eval_episodes(cfg, policy.actor, run_seed,
                                              cfg.run.eval_episodes);
      const MetricRecord metrics = compute_metrics(eval_traces(episodes));
      history << progress.env_steps << ",";
      detail::write_csv_values(history, metric_column_values(metrics));
      history.flush();
      ++progress.evals;
      if (metrics.eval_return.mean > best_return) {
        best_return = metrics.eval_return.mean;
        has_best = true;
        save_checkpoint(snapshot(), (dir / "best.ckpt").string());
      }
      next_eval += cfg.run.eval_interval;
    }
  }

  save_checkpoint(snapshot(), (dir / "final.ckpt").string());
  progress.best_return = best_return;
  return progress;
}

/// Loads the run directory's resolved config plus its best checkpoint
/// (falling back to the final one for runs that never evaluated).
struct LoadedRun {
  RunConfig cfg;
  long seed = 0;
  Checkpoint checkpoint;
  PolicyBundle policy;
};

inline LoadedRun load_run(const std::string& run_dir) {
  namespace fs = std::filesystem;
  LoadedRun run;
  run.cfg = load_run_config((fs::path(run_dir) / "config.ini").string());
  run.seed = run.cfg.run.seeds.front();
  const fs::path best = fs::path(run_dir) / "best.ckpt";
  const fs::path final_ck = fs::path(run_dir) / "final.ckpt";
  run.checkpoint =
      load_checkpoint((fs::exists(best) ? best : final_ck).string());
  run.policy = policy_from_checkpoint(run.cfg, run.checkpoint);
  return run;
}

}  // namespace auvlab
