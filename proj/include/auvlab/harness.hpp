#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "auvlab/action.hpp"
#include "auvlab/checkpoint.hpp"
#include "auvlab/config.hpp"
#include "auvlab/environment.hpp"
#include "auvlab/learner.hpp"
#include "auvlab/metrics.hpp"
#include "auvlab/reward.hpp"
#include "auvlab/semantics.hpp"

namespace auvlab {

/// Fixed stream labels for seed derivation, so training episodes, the
/// evaluation protocol, and network initialization never share draws.
/// Evaluation seeds depend only on the run seed and the episode ordinal,
/// which keeps every evaluation round (and the stress protocol) on the
/// same initial conditions.
namespace seed_stream {
constexpr std::uint64_t kTrainEpisode = 0;
constexpr std::uint64_t kEvalEpisode = 1;
constexpr std::uint64_t kActorInit = 10;
constexpr std::uint64_t kActionNoise = 11;
constexpr std::uint64_t kUpdateShuffle = 12;
}  // namespace seed_stream

inline std::uint64_t train_episode_seed(std::uint64_t run_seed,
                                        std::uint64_t episode_index) {
  return Rng::derive(run_seed, seed_stream::kTrainEpisode, episode_index);
}

inline std::uint64_t eval_episode_seed(std::uint64_t run_seed,
                                       std::uint64_t episode_index) {
  return Rng::derive(run_seed, seed_stream::kEvalEpisode, episode_index);
}

/// Worker cap for embarrassingly parallel evaluation grids, controlled
/// by the AUVLAB_THREADS environment variable (default: hardware
/// concurrency).
inline int worker_count() {
  if (const char* env = std::getenv("AUVLAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n >= 1) return static_cast<int>(std::min<long>(n, 256));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(0..n-1) on up to worker_count() threads.  Tasks must be
/// independent; the first exception is rethrown after all workers join.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// What one swarm step produced, captured for rollout storage, traces,
/// and diagnostics logging.
struct SwarmStepOutcome {
  std::vector<Eigen::VectorXd> executed;
  RewardBreakdown reward;
  EnvStepResult env;
};

/// Owns one episode: the world, the communication graph, and the cached
/// semantic annotations.  Observations are refreshed after every
/// environment step so the reward's phase labels and the next step's
/// observation blocks come from the same classification pass.
class SwarmSession {
 public:
  SwarmSession(const RunConfig& cfg, std::uint64_t env_seed)
      : cfg_(cfg),
        wiring_(variant_wiring(cfg.run.variant)),
        world_(reset(cfg.env, env_seed, action_dim(cfg.action_mode))) {
    refresh();
  }

  const WorldState& world() const { return world_; }
  bool done() const { return done_; }
  int n_agents() const { return cfg_.env.episode.n_agents; }

  const std::vector<Eigen::VectorXd>& observations() const { return obs_; }
  const std::vector<TaskPhase>& phases() const { return phases_; }

  Eigen::VectorXd joint_observation() const {
    const int d = static_cast<int>(obs_[0].size());
    Eigen::VectorXd joint(static_cast<long>(d) * n_agents());
    for (int i = 0; i < n_agents(); ++i) joint.segment(i * d, d) = obs_[i];
    return joint;
  }

  /// Applies one commanded action per agent: smoothing, the configured
  /// control interface, the environment step, then scoring against the
  /// refreshed post-step state.  The previous-action memory is updated
  /// only after scoring so the action cost compares against the action
  /// that was actually executed last.
  SwarmStepOutcome advance(const std::vector<Eigen::VectorXd>& commanded) {
    const int n = n_agents();
    SwarmStepOutcome out;
    out.executed.resize(n);
    std::vector<Vector6d> wrenches(n);
    for (int i = 0; i < n; ++i) {
      VehicleState& a = world_.agents[i];
      out.executed[i] = smooth_and_limit(commanded[i], a.prev_action,
                                         cfg_.controller);
      wrenches[i] = action_to_wrench(out.executed[i], a.body, cfg_.action_mode,
                                     cfg_.controller, cfg_.dynamics);
    }
    out.env = step(world_, wrenches, cfg_.env, cfg_.dynamics);
    refresh();
    out.reward = score_step(world_, graph_, out.executed, phases_,
                            cfg_.reward);
    for (int i = 0; i < n; ++i) world_.agents[i].prev_action = out.executed[i];
    done_ = out.env.done;
    return out;
  }

 private:
  void refresh() {
    const int n = n_agents();
    std::vector<Eigen::Vector3d> positions(n);
    for (int i = 0; i < n; ++i) positions[i] = world_.agents[i].body.position;
    graph_ = build_comm_graph(positions, world_.message_age, cfg_.env.link);
    phases_.resize(n);
    obs_.resize(n);
    for (int i = 0; i < n; ++i) {
      const VehicleState& a = world_.agents[i];
      const TrackingDiagnostics diag =
          build_diagnostics(a.geo, a, cfg_.semantics, cfg_.env.episode);
      phases_[i] = classify_phase(a.geo.lost, a.geo.distance, diag.de_bar,
                                  cfg_.semantics);
      const Eigen::VectorXd raw =
          observe_raw(world_, i, graph_, cfg_.env.episode);
      if (wiring_.obs == ObsMode::kSemantic) {
        const ObservationQuality quality =
            classify_quality(a.geo.confidence, a.geo.lost, cfg_.semantics);
        const GraphSummary summary = graph_summary(
            i, graph_, world_.last_received_error.row(i).transpose(),
            a.geo.confidence, a.geo.error, cfg_.semantics);
        obs_[i] = assemble_observation(raw, diag, phases_[i], quality,
                                       summary, n);
      } else {
        obs_[i] = raw;
      }
    }
  }

  RunConfig cfg_;
  VariantWiring wiring_;
  WorldState world_;
  CommGraph graph_;
  std::vector<TaskPhase> phases_;
  std::vector<Eigen::VectorXd> obs_;
  bool done_ = false;
};

/// One evaluation episode: the metric trace plus (optionally) the full
/// position history for trajectory export.
struct EvalEpisode {
  EpisodeTrace trace;
  std::vector<Eigen::Vector3d> target_path;                ///< includes t = 0
  std::vector<std::vector<Eigen::Vector3d>> agent_paths;   ///< [agent][t]
};

/// Plays the deterministic policy mean for `episodes` episodes on the
/// fixed evaluation seeds of `run_seed`.
inline std::vector<EvalEpisode> run_eval_episodes(const RunConfig& cfg,
                                                  const GaussianActor& actor,
                                                  std::uint64_t run_seed,
                                                  int episodes,
                                                  bool capture_paths = false) {
  std::vector<EvalEpisode> out(episodes);
  const int n = cfg.env.episode.n_agents;
  const int act = action_dim(cfg.action_mode);
  for (int k = 0; k < episodes; ++k) {
    SwarmSession session(cfg, eval_episode_seed(run_seed, k));
    EvalEpisode& ep = out[k];
    EpisodeTrace& tr = ep.trace;
    tr.n_agents = n;
    tr.action_dim = act;
    tr.desired_distance = cfg.env.episode.desired_distance;
    const int horizon = cfg.env.episode.horizon;
    tr.distances.resize(horizon, n);
    tr.lost.resize(horizon, n);
    tr.saturated.resize(horizon, n);
    tr.cost.resize(horizon, n);
    if (capture_paths) {
      ep.target_path.push_back(session.world().target.position);
      ep.agent_paths.assign(n, {});
      for (int i = 0; i < n; ++i) {
        ep.agent_paths[i].push_back(session.world().agents[i].body.position);
      }
    }
    std::vector<Eigen::VectorXd> commanded(n);
    int t = 0;
    while (!session.done()) {
      for (int i = 0; i < n; ++i) {
        commanded[i] = actor_mean_action(actor, session.observations()[i]);
      }
      const SwarmStepOutcome step = session.advance(commanded);
      tr.rewards.push_back(step.reward.global);
      tr.comm_quality.push_back(step.reward.r_comm);
      for (int i = 0; i < n; ++i) {
        const VehicleState& a = session.world().agents[i];
        tr.distances(t, i) = a.geo.distance;
        tr.lost(t, i) = a.geo.lost;
        tr.saturated(t, i) =
            (step.executed[i].array().abs() >= 0.99).count();
        tr.cost(t, i) = step.reward.cost[i];
      }
      if (capture_paths) {
        ep.target_path.push_back(session.world().target.position);
        for (int i = 0; i < n; ++i) {
          ep.agent_paths[i].push_back(
              session.world().agents[i].body.position);
        }
      }
      ++t;
    }
    tr.distances.conservativeResize(t, n);
    tr.lost.conservativeResize(t, n);
    tr.saturated.conservativeResize(t, n);
    tr.cost.conservativeResize(t, n);
  }
  return out;
}

inline std::vector<EpisodeTrace> eval_traces(
    const std::vector<EvalEpisode>& episodes) {
  std::vector<EpisodeTrace> out;
  out.reserve(episodes.size());
  for (const auto& ep : episodes) out.push_back(ep.trace);
  return out;
}

/// Builds the actor/critic pair for a configuration, freshly initialized.
struct PolicyBundle {
  GaussianActor actor;
  Mlp critic;
  AdamOptimizer actor_opt;
  AdamOptimizer critic_opt;
};

inline PolicyBundle make_policy(const RunConfig& cfg, Rng& init_rng) {
  PolicyBundle b;
  const int obs = observation_length(cfg);
  const int act = action_dim(cfg.action_mode);
  const int joint = joint_observation_length(cfg);
  b.actor = GaussianActor::make(obs, act, cfg.ppo, init_rng);
  b.critic = Mlp::make({joint, cfg.ppo.hidden_units, cfg.ppo.hidden_units, 1},
                       init_rng);
  b.actor_opt.init(b.actor.parameter_count());
  b.critic_opt.init(b.critic.parameter_count());
  return b;
}

inline std::vector<std::uint32_t> actor_layer_sizes(const RunConfig& cfg) {
  return {static_cast<std::uint32_t>(observation_length(cfg)),
          static_cast<std::uint32_t>(cfg.ppo.hidden_units),
          static_cast<std::uint32_t>(cfg.ppo.hidden_units),
          static_cast<std::uint32_t>(action_dim(cfg.action_mode))};
}

inline std::vector<std::uint32_t> critic_layer_sizes(const RunConfig& cfg) {
  return {static_cast<std::uint32_t>(joint_observation_length(cfg)),
          static_cast<std::uint32_t>(cfg.ppo.hidden_units),
          static_cast<std::uint32_t>(cfg.ppo.hidden_units), 1u};
}

/// Restores a policy from a checkpoint, refusing architecture mismatches
/// instead of silently reshaping.
inline PolicyBundle policy_from_checkpoint(const RunConfig& cfg,
                                           const Checkpoint& ck) {
  if (ck.actor_layers != actor_layer_sizes(cfg) ||
      ck.critic_layers != critic_layer_sizes(cfg)) {
    throw CheckpointError(
        "checkpoint architecture does not match the configuration");
  }
  Rng scratch(0);
  PolicyBundle b = make_policy(cfg, scratch);
  b.actor.set_from_flat(ck.actor_params);
  b.critic.set_from_flat(ck.critic_params);
  b.actor_opt.m = ck.actor_m;
  b.actor_opt.v = ck.actor_v;
  b.actor_opt.t = static_cast<long>(ck.actor_t);
  b.critic_opt.m = ck.critic_m;
  b.critic_opt.v = ck.critic_v;
  b.critic_opt.t = static_cast<long>(ck.critic_t);
  return b;
}

}  // namespace auvlab
