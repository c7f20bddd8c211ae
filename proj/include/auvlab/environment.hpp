#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auvlab/dynamics.hpp"
#include "auvlab/link.hpp"
#include "auvlab/rng.hpp"

namespace auvlab {

struct ResetRejection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownCondition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Episode-level constants: swarm size, horizon, workspace geometry and
/// the sensing thresholds that define tracking success.
struct EpisodeConfig {
  int n_agents = 4;
  int horizon = 500;
  double dt = 0.1;
  double workspace_half = 1.0;    ///< workspace is [-half, half]^3
  double desired_distance = 0.015;
  double sensing_range = 0.45;
  double loss_threshold = 0.65;
  double min_separation = 0.10;   ///< initial inter-agent spacing floor
  double world_scale = 1.0;       ///< workspace units per body-frame metre
  int history_window = 10;        ///< error-history buffer length k
  double target_sigma_turn = 0.05;  ///< rad, per-step heading perturbation
  double target_speed_factor = 1.0;
  double disturbance_sigma = 0.0;   ///< per-axis wrench noise, N / N m
};

/// Initial-condition sampling ranges for one curriculum stage.
struct ResetProfile {
  Eigen::Vector2d target_norm_range;
  Eigen::Vector2d offset_range;   ///< agent-to-target distance
  Eigen::Vector2d speed_range;    ///< target speed, units/s

  static ResetProfile medium() {
    return {{0.25, 0.55}, {0.25, 0.45}, {0.003, 0.008}};
  }
  static ResetProfile hard() {
    return {{0.45, 0.75}, {0.40, 0.70}, {0.006, 0.014}};
  }
};

/// Stress-condition override magnitudes.  The evaluation protocol names
/// the conditions; these scales decide how hard each one bites.
struct StressScales {
  double target_speed = 1.5;
  double far_init = 1.3;        ///< multiplier on the offset upper bound
  double sensing = 0.8;         ///< multiplier on the sensing range
  double packet_loss = 0.3;
  double attenuation = 0.5;
};

/// Everything the episode engine needs, bundled so stress conditions can
/// rewrite it as one value.
struct EnvConfig {
  EpisodeConfig episode;
  ResetProfile profile = ResetProfile::medium();
  LinkParams link;
  StressScales stress;
};

struct TargetState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double base_speed = 0.0;  ///< sampled at reset, before stress factors
};

/// Per-agent view of the target at one step.
struct TrackingGeometry {
  double distance = 0.0;
  double error = 0.0;  ///< |distance - desired_distance|
  Eigen::Vector3d rel_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d rel_velocity = Eigen::Vector3d::Zero();
  double confidence = 0.0;  ///< clip(1 - d/R_s, 0, 1)
  int lost = 0;             ///< 1 iff distance > loss_threshold
};

struct VehicleState {
  RigidBodyState body;
  Eigen::VectorXd prev_action;  ///< last executed action, zeros at reset
  long loss_streak = 0;         ///< consecutive post-step states with lost=1
  bool has_prev = false;        ///< geometry history exists (t > 0)
  double prev_error = 0.0;
  double prev_distance = 0.0;
  int prev_lost = 0;
  std::deque<double> error_history;  ///< completed-step errors, newest last
  TrackingGeometry geo;
};

struct WorldState {
  std::vector<VehicleState> agents;
  TargetState target;
  long t = 0;
  Eigen::MatrixXd message_age;          ///< per-pair staleness, steps
  Eigen::MatrixXd last_received_error;  ///< (i, j): e_j as last heard by i
  Rng rng;
  long boundary_exits = 0;  ///< agent-steps spent outside the workspace
  long pitch_clamps = 0;
};

inline bool inside_workspace(const Eigen::Vector3d& p, double half) {
  return p.cwiseAbs().maxCoeff() <= half;
}

inline TrackingGeometry tracking_geometry(const WorldState& world, int agent_i,
                                          const EpisodeConfig& cfg) {
  const VehicleState& a = world.agents[agent_i];
  TrackingGeometry g;
  g.rel_position = world.target.position - a.body.position;
  g.rel_velocity = world.target.velocity -
                   cfg.world_scale * (body_to_world(a.body.attitude) *
                                      a.body.nu.head<3>());
  g.distance = g.rel_position.norm();
  g.error = std::abs(g.distance - cfg.desired_distance);
  g.confidence = std::clamp(1.0 - g.distance / cfg.sensing_range, 0.0, 1.0);
  g.lost = g.distance > cfg.loss_threshold ? 1 : 0;
  return g;
}

/// Samples a fresh episode.  Target pose/speed and per-agent offsets come
/// from the profile ranges; agents spawn level and at rest with the
/// required pairwise spacing (rejection-sampled, which throws
/// ResetRejection if the workspace cannot fit the swarm).
inline WorldState reset(const EnvConfig& cfg, std::uint64_t seed,
                        int action_dim) {
  const EpisodeConfig& ep = cfg.episode;
  WorldState world;
  world.rng = Rng(seed);
  world.message_age = Eigen::MatrixXd::Zero(ep.n_agents, ep.n_agents);
  world.last_received_error = Eigen::MatrixXd::Zero(ep.n_agents, ep.n_agents);

  for (int tries = 0;; ++tries) {
    if (tries >= 1000) throw ResetRejection("target position sampling failed");
    const Eigen::Vector3d p =
        world.rng.unit_vector() *
        world.rng.uniform(cfg.profile.target_norm_range.x(),
                          cfg.profile.target_norm_range.y());
    if (inside_workspace(p, ep.workspace_half)) {
      world.target.position = p;
      break;
    }
  }
  world.target.base_speed = world.rng.uniform(cfg.profile.speed_range.x(),
                                              cfg.profile.speed_range.y());
  world.target.velocity = world.rng.unit_vector() * world.target.base_speed;

  std::vector<Eigen::Vector3d> placed;
  for (int i = 0; i < ep.n_agents; ++i) {
    bool ok = false;
    for (int tries = 0; tries < 1000 && !ok; ++tries) {
      const Eigen::Vector3d p =
          world.target.position +
          world.rng.unit_vector() * world.rng.uniform(
                                        cfg.profile.offset_range.x(),
                                        cfg.profile.offset_range.y());
      if (!inside_workspace(p, ep.workspace_half)) continue;
      ok = true;
      for (const auto& q : placed) {
        if ((p - q).norm() < ep.min_separation) {
          ok = false;
          break;
        }
      }
      if (ok) placed.push_back(p);
    }
    if (!ok) throw ResetRejection("agent separation sampling failed");
  }

  world.agents.resize(ep.n_agents);
  for (int i = 0; i < ep.n_agents; ++i) {
    VehicleState& a = world.agents[i];
    a.body.position = placed[i];
    a.prev_action = Eigen::VectorXd::Zero(action_dim);
    a.geo = tracking_geometry(world, i, ep);
  }
  for (int i = 0; i < ep.n_agents; ++i) {
    for (int j = 0; j < ep.n_agents; ++j) {
      if (i != j) world.last_received_error(i, j) = world.agents[j].geo.error;
    }
  }
  return world;
}

/// Constant-speed random-heading target walk: the heading is rotated by a
/// Gaussian angle about a random perpendicular axis each step, and the
/// position reflects off the workspace walls.
inline TargetState target_step(const TargetState& target, Rng& rng,
                               const EnvConfig& cfg) {
  TargetState next = target;
  const double speed = target.base_speed * cfg.episode.target_speed_factor;
  if (speed < 1e-15) return next;

  Eigen::Vector3d dir = target.velocity.normalized();
  const double angle = rng.normal(0.0, cfg.episode.target_sigma_turn);
  Eigen::Vector3d axis;
  do {
    const Eigen::Vector3d g = rng.unit_vector();
    axis = g - g.dot(dir) * dir;
  } while (axis.norm() < 1e-9);
  axis.normalize();
  dir = dir * std::cos(angle) + axis.cross(dir) * std::sin(angle) +
        axis * (axis.dot(dir)) * (1.0 - std::cos(angle));

  next.velocity = dir * speed;
  next.position = target.position + next.velocity * cfg.episode.dt;
  const double half = cfg.episode.workspace_half;
  for (int c = 0; c < 3; ++c) {
    while (std::abs(next.position[c]) > half) {
      next.position[c] = std::copysign(2.0 * half, next.position[c]) -
                         next.position[c];
      next.velocity[c] = -next.velocity[c];
    }
  }
  return next;
}

/// Raw per-agent observation: own pose and body velocity, target-relative
/// position/velocity (zeroed when the target is lost), then per neighbor
/// in index order the relative position, relative world velocity, and the
/// current link quality.
inline Eigen::VectorXd observe_raw(const WorldState& world, int agent_i,
                                   const CommGraph& graph,
                                   const EpisodeConfig& cfg) {
  const int n = cfg.n_agents;
  Eigen::VectorXd obs(18 + 7 * (n - 1));
  const VehicleState& a = world.agents[agent_i];

  obs.segment<3>(0) = a.body.position;
  obs.segment<3>(3) = a.body.attitude;
  obs.segment<6>(6) = a.body.nu;
  if (a.geo.lost) {
    obs.segment<6>(12).setZero();
  } else {
    obs.segment<3>(12) = a.geo.rel_position;
    obs.segment<3>(15) = a.geo.rel_velocity;
  }

  int at = 18;
  const Eigen::Vector3d v_i = cfg.world_scale *
                              (body_to_world(a.body.attitude) *
                               a.body.nu.head<3>());
  for (int j = 0; j < n; ++j) {
    if (j == agent_i) continue;
    const VehicleState& b = world.agents[j];
    const Eigen::Vector3d v_j = cfg.world_scale *
                                (body_to_world(b.body.attitude) *
                                 b.body.nu.head<3>());
    obs.segment<3>(at) = b.body.position - a.body.position;
    obs.segment<3>(at + 3) = v_j - v_i;
    obs(at + 6) = graph.quality(agent_i, j);
    at += 7;
  }
  return obs;
}

struct StepInfo {
  std::vector<double> distances;
  long boundary_exits = 0;  ///< cumulative over the episode
  long pitch_clamps = 0;
};

struct EnvStepResult {
  std::vector<TrackingGeometry> geometry;
  bool done = false;
  StepInfo info;
};

/// Advances the world by one control period: vehicle dynamics under the
/// given wrenches, target motion, geometry/loss bookkeeping, and the
/// message-age update for the link layer.
///
/// Random draws happen in a fixed order (per-agent disturbances, target
/// heading, per-pair packet losses) so trajectories are reproducible.
inline EnvStepResult step(WorldState& world,
                          const std::vector<Vector6d>& wrenches,
                          const EnvConfig& cfg,
                          const RigidBodyParams& dyn) {
  const EpisodeConfig& ep = cfg.episode;
  if (static_cast<int>(wrenches.size()) != ep.n_agents) {
    throw std::invalid_argument("one wrench per agent required");
  }

  for (auto& a : world.agents) {
    a.has_prev = true;
    a.prev_error = a.geo.error;
    a.prev_distance = a.geo.distance;
    a.prev_lost = a.geo.lost;
    a.error_history.push_back(a.geo.error);
    while (static_cast<int>(a.error_history.size()) > ep.history_window) {
      a.error_history.pop_front();
    }
  }

  for (int i = 0; i < ep.n_agents; ++i) {
    Vector6d w = Vector6d::Zero();
    if (ep.disturbance_sigma > 0.0) {
      for (int c = 0; c < 6; ++c) w(c) = world.rng.normal(0.0, ep.disturbance_sigma);
    }
    const auto out = step_dynamics(world.agents[i].body, wrenches[i], w, dyn);
    world.agents[i].body = out.state;
    if (out.pitch_clamped) ++world.pitch_clamps;
    if (!inside_workspace(out.state.position, ep.workspace_half)) {
      ++world.boundary_exits;
    }
  }

  world.target = target_step(world.target, world.rng, cfg);
  ++world.t;

  EnvStepResult result;
  for (int i = 0; i < ep.n_agents; ++i) {
    VehicleState& a = world.agents[i];
    a.geo = tracking_geometry(world, i, ep);
    a.loss_streak = a.geo.lost ? a.loss_streak + 1 : 0;
    result.geometry.push_back(a.geo);
    result.info.distances.push_back(a.geo.distance);
  }

  for (int i = 0; i < ep.n_agents; ++i) {
    for (int j = i + 1; j < ep.n_agents; ++j) {
      const bool delivered = cfg.link.packet_loss <= 0.0 ||
                             world.rng.uniform() >= cfg.link.packet_loss;
      if (delivered) {
        world.message_age(i, j) = world.message_age(j, i) = 0.0;
        world.last_received_error(i, j) = world.agents[j].geo.error;
        world.last_received_error(j, i) = world.agents[i].geo.error;
      } else {
        world.message_age(i, j) += 1.0;
        world.message_age(j, i) = world.message_age(i, j);
      }
    }
  }

  result.done = world.t >= ep.horizon;
  result.info.boundary_exits = world.boundary_exits;
  result.info.pitch_clamps = world.pitch_clamps;
  return result;
}

enum class StressCondition {
  kNominal,
  kFastTarget,
  kFarInit,
  kLimitedSensing,
  kCommDegraded,
  kCombined,
};

inline const char* condition_name(StressCondition c) {
  switch (c) {
    case StressCondition::kNominal: return "nominal";
    case StressCondition::kFastTarget: return "fast_target";
    case StressCondition::kFarInit: return "far_init";
    case StressCondition::kLimitedSensing: return "limited_sensing";
    case StressCondition::kCommDegraded: return "comm_degraded";
    case StressCondition::kCombined: return "combined";
  }
  throw UnknownCondition("unnamed stress condition");
}

inline StressCondition parse_condition(const std::string& name) {
  for (StressCondition c :
       {StressCondition::kNominal, StressCondition::kFastTarget,
        StressCondition::kFarInit, StressCondition::kLimitedSensing,
        StressCondition::kCommDegraded, StressCondition::kCombined}) {
    if (name == condition_name(c)) return c;
  }
  throw UnknownCondition("unknown stress condition: " + name);
}

/// Rewrites the environment config for one evaluation stress condition.
/// `nominal` is the identity; `combined` applies every override at once.
inline EnvConfig apply_stress(const EnvConfig& cfg, StressCondition condition) {
  EnvConfig out = cfg;
  const bool all = condition == StressCondition::kCombined;
  switch (condition) {
    case StressCondition::kNominal:
      break;
    case StressCondition::kFastTarget:
    case StressCondition::kFarInit:
    case StressCondition::kLimitedSensing:
    case StressCondition::kCommDegraded:
    case StressCondition::kCombined:
      if (all || condition == StressCondition::kFastTarget) {
        out.episode.target_speed_factor *= cfg.stress.target_speed;
      }
      if (all || condition == StressCondition::kFarInit) {
        out.profile.offset_range.y() *= cfg.stress.far_init;
      }
      if (all || condition == StressCondition::kLimitedSensing) {
        out.episode.sensing_range *= cfg.stress.sensing;
      }
      if (all || condition == StressCondition::kCommDegraded) {
        out.link.mode = LinkMode::kExtended;
        out.link.packet_loss = cfg.stress.packet_loss;
        out.link.attenuation = cfg.stress.attenuation;
      }
      break;
  }
  return out;
}

}  // namespace auvlab
