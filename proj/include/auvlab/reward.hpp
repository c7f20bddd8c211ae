#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "auvlab/environment.hpp"
#include "auvlab/link.hpp"
#include "auvlab/semantics.hpp"

namespace auvlab {

/// Shaping weights: the distance band around the desired distance, the
/// error normalizer, the per-agent tracking-component weights, and the
/// global mixing weights.  Tracking carries the dominant global weight.
struct RewardWeights {
  double band_lower = 0.0075;
  double band_upper = 0.03;
  double e_max = 1.0;
  double w_band = 0.5;
  double w_improve = 0.3;
  double w_close = 0.15;
  double w_reacq = 0.3;
  double w_crowd = 0.3;
  double w_track = 1.0;
  double w_obs = 0.3;
  double w_coord = 0.2;
  double w_comm = 0.1;
  double w_sem = 0.4;
  double w_action = 0.2;

  double global_weight_sum() const {
    return w_track + w_obs + w_coord + w_comm + w_sem + w_action;
  }
};

/// b: distance outside the band [d_l, d_u] (0 inside).  B: band-stability
/// score, 1 inside the band, fading to 0 one e_max outside it.
inline std::pair<double, double> band_terms(double distance,
                                            const RewardWeights& w) {
  const double b = std::max(
      {0.0, w.band_lower - distance, distance - w.band_upper});
  const double stability = std::clamp(1.0 - b / w.e_max, 0.0, 1.0);
  return {b, stability};
}

struct TrackComponents {
  double improvement = 0.0;   ///< P: one-step error improvement
  double closing = 0.0;       ///< C: closing tendency (distance shrinking)
  double reacquisition = 0.0; ///< R: 1 on a lost -> tracked transition
  double crowding = 0.0;      ///< U: too-close penalty inside d_l
};

inline TrackComponents track_components(const TrackingGeometry& geo,
                                        const VehicleState& agent,
                                        const RewardWeights& w) {
  TrackComponents t;
  if (agent.has_prev) {
    t.improvement =
        std::clamp((agent.prev_error - geo.error) / w.e_max, -1.0, 1.0);
    t.closing = std::clamp(-(geo.distance - agent.prev_distance) / w.e_max,
                           -1.0, 1.0);
    t.reacquisition = (agent.prev_lost == 1 && geo.lost == 0) ? 1.0 : 0.0;
  }
  t.crowding =
      std::clamp((w.band_lower - geo.distance) / w.band_lower, 0.0, 1.0);
  return t;
}

inline double track_reward(double band_stability, const TrackComponents& t,
                           const RewardWeights& w) {
  return std::clamp(w.w_band * band_stability + w.w_improve * t.improvement +
                        w.w_close * t.closing + w.w_reacq * t.reacquisition -
                        w.w_crowd * t.crowding,
                    -1.0, 1.0);
}

inline double obs_reward(double confidence, int lost) {
  return std::clamp(confidence - lost, -1.0, 1.0);
}

/// Phase-dependent shaping: while lost, only recovery progress counts;
/// while converging, progress and closing net of crowding; once stable,
/// holding confident non-crowding station is what pays.
inline double semantic_reward(TaskPhase phase, const TrackComponents& t,
                              double confidence) {
  switch (phase) {
    case TaskPhase::kLost:
      return t.improvement;
    case TaskPhase::kSearch:
    case TaskPhase::kApproach:
      return 0.65 * t.improvement + 0.35 * t.closing - 0.25 * t.crowding;
    case TaskPhase::kStable:
      return 0.55 * confidence + 0.45 * (1.0 - t.crowding);
  }
  return 0.0;
}

inline double action_cost(const Eigen::VectorXd& a,
                          const Eigen::VectorXd& a_prev) {
  return std::clamp(0.6 * a.squaredNorm() + 0.4 * (a - a_prev).squaredNorm(),
                    0.0, 1.0);
}

/// Full per-step reward record: per-agent terms, swarm terms, and the
/// shared global scalar (per-agent terms averaged over the swarm).
struct RewardBreakdown {
  std::vector<double> band_deviation;   // b
  std::vector<double> band_stability;   // B
  std::vector<TrackComponents> components;
  std::vector<double> r_track;
  std::vector<double> r_obs;
  std::vector<double> r_sem;
  std::vector<double> cost;
  double r_coord = 0.0;
  double r_comm = 0.0;
  double global = 0.0;
};

inline std::pair<double, double> swarm_rewards(
    const std::vector<double>& band_deviation, const CommGraph& graph,
    const RewardWeights& w) {
  double mean_b = 0.0;
  for (double b : band_deviation) mean_b += b;
  mean_b /= static_cast<double>(band_deviation.size());
  const double r_coord = std::clamp(1.0 - mean_b / w.e_max, 0.0, 1.0);
  return {r_coord, graph.mean_quality()};
}

/// Scores one completed step.  `executed` are the post-smoothing actions
/// the vehicles actually ran this step; the previous executed actions are
/// taken from the agent state (zeros on the first step).
inline RewardBreakdown score_step(const WorldState& world,
                                  const CommGraph& graph,
                                  const std::vector<Eigen::VectorXd>& executed,
                                  const std::vector<TaskPhase>& phases,
                                  const RewardWeights& w) {
  const int n = static_cast<int>(world.agents.size());
  RewardBreakdown out;
  double track_sum = 0, obs_sum = 0, sem_sum = 0, cost_sum = 0;
  for (int i = 0; i < n; ++i) {
    const VehicleState& a = world.agents[i];
    const auto [b, stability] = band_terms(a.geo.distance, w);
    const TrackComponents t = track_components(a.geo, a, w);
    out.band_deviation.push_back(b);
    out.band_stability.push_back(stability);
    out.components.push_back(t);
    out.r_track.push_back(track_reward(stability, t, w));
    out.r_obs.push_back(obs_reward(a.geo.confidence, a.geo.lost));
    out.r_sem.push_back(semantic_reward(phases[i], t, a.geo.confidence));
    out.cost.push_back(action_cost(executed[i], a.prev_action));
    track_sum += out.r_track.back();
    obs_sum += out.r_obs.back();
    sem_sum += out.r_sem.back();
    cost_sum += out.cost.back();
  }
  const auto [r_coord, r_comm] = swarm_rewards(out.band_deviation, graph, w);
  out.r_coord = r_coord;
  out.r_comm = r_comm;
  out.global = w.w_track * track_sum / n + w.w_obs * obs_sum / n +
               w.w_coord * r_coord + w.w_comm * r_comm +
               w.w_sem * sem_sum / n - w.w_action * cost_sum / n;
  return out;
}

}  // namespace auvlab
