#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "auvlab/environment.hpp"
#include "auvlab/link.hpp"

namespace auvlab {

struct LayoutMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thresholds and normalizers of the semantic feature layer.
struct SemanticsConfig {
  double e_max = 1.0;          ///< error normalizer
  double quality_high = 0.66;  ///< confidence floor for "high"
  double quality_medium = 0.33;
  double role_confidence = 0.5;  ///< c floor for the primary-tracking role
  double d_near = 0.03;  ///< "stable" distance bound; mirrors the reward band
  int history_window = 10;
};

/// Normalized per-agent tracking summary, 8 scalars:
/// [d_bar, e_bar, de_bar, -rho_bar, mean_k, c, l, streak/T].
/// de_bar is the one-step error improvement, -rho_bar the closing trend
/// (positive while the distance shrinks); both are zero at step 0.
struct TrackingDiagnostics {
  double d_bar = 0.0;
  double e_bar = 0.0;
  double de_bar = 0.0;
  double closing = 0.0;
  double mean_k = 0.0;  ///< windowed mean error incl. the current step
  double confidence = 0.0;
  double lost = 0.0;
  double streak_frac = 0.0;

  Eigen::VectorXd vector() const {
    Eigen::VectorXd v(8);
    v << d_bar, e_bar, de_bar, closing, mean_k, confidence, lost, streak_frac;
    return v;
  }
};

inline TrackingDiagnostics build_diagnostics(const TrackingGeometry& geo,
                                             const VehicleState& agent,
                                             const SemanticsConfig& sem,
                                             const EpisodeConfig& ep) {
  const double diagonal = 2.0 * ep.workspace_half * std::sqrt(3.0);
  TrackingDiagnostics d;
  d.d_bar = std::clamp(geo.distance / diagonal, 0.0, 1.0);
  d.e_bar = std::clamp(geo.error / sem.e_max, 0.0, 1.0);
  if (agent.has_prev) {
    d.de_bar =
        std::clamp((agent.prev_error - geo.error) / sem.e_max, -1.0, 1.0);
    d.closing =
        std::clamp(-(geo.distance - agent.prev_distance) / sem.e_max, -1.0, 1.0);
  }
  double sum = geo.error;
  int count = 1;
  const int past = std::min<int>(sem.history_window - 1,
                                 static_cast<int>(agent.error_history.size()));
  for (int i = 0; i < past; ++i) {
    sum += agent.error_history[agent.error_history.size() - 1 - i];
    ++count;
  }
  d.mean_k = std::clamp(sum / count / sem.e_max, 0.0, 1.0);
  d.confidence = geo.confidence;
  d.lost = geo.lost;
  d.streak_frac = std::clamp(
      static_cast<double>(agent.loss_streak) / ep.horizon, 0.0, 1.0);
  return d;
}

enum class TaskPhase { kSearch = 0, kApproach, kStable, kLost };

/// Phase rules, evaluated in order: lost wins, then "stable" when inside
/// the near range, then "approach" while the error is improving, else
/// "search".
inline TaskPhase classify_phase(int lost, double distance, double delta_e,
                                const SemanticsConfig& sem) {
  if (lost) return TaskPhase::kLost;
  if (distance <= sem.d_near) return TaskPhase::kStable;
  if (delta_e > 0.0) return TaskPhase::kApproach;
  return TaskPhase::kSearch;
}

enum class ObservationQuality { kHigh = 0, kMedium, kLow, kUnavailable };

inline ObservationQuality classify_quality(double confidence, int lost,
                                           const SemanticsConfig& sem) {
  if (lost) return ObservationQuality::kUnavailable;
  if (confidence >= sem.quality_high) return ObservationQuality::kHigh;
  if (confidence >= sem.quality_medium) return ObservationQuality::kMedium;
  return ObservationQuality::kLow;
}

inline Eigen::Vector4d one_hot4(int index) {
  Eigen::Vector4d v = Eigen::Vector4d::Zero();
  v(index) = 1.0;
  return v;
}

/// Compact neighborhood summary, 6 scalars: [|N|/N, mean q, max q,
/// mean neighbor error, adv, role].  adv compares the neighborhood's mean
/// tracking error with our own; the role bit marks an agent that both
/// out-tracks its neighborhood and sees the target confidently.
struct GraphSummary {
  double neighbor_fraction = 0.0;
  double mean_quality = 0.0;
  double max_quality = 0.0;
  double mean_neighbor_error = 0.0;
  double advantage = 0.0;
  double role = 0.0;

  Eigen::VectorXd vector() const {
    Eigen::VectorXd v(6);
    v << neighbor_fraction, mean_quality, max_quality, mean_neighbor_error,
        advantage, role;
    return v;
  }
};

/// neighbor_errors row semantics: entry j holds e_j as last received by
/// agent_i (held-last-value under packet loss; freshness is already in
/// the link qualities).  An isolated agent gets zero graph stats and its
/// role is decided by confidence alone.
inline GraphSummary graph_summary(int agent_i, const CommGraph& graph,
                                  const Eigen::VectorXd& neighbor_errors,
                                  double confidence, double own_error,
                                  const SemanticsConfig& sem) {
  GraphSummary g;
  const auto ns = graph.neighbors(agent_i);
  if (ns.empty()) {
    g.role = confidence >= sem.role_confidence ? 1.0 : 0.0;
    return g;
  }
  double qsum = 0.0, qmax = 0.0, esum = 0.0;
  for (int j : ns) {
    const double q = graph.quality(agent_i, j);
    qsum += q;
    qmax = std::max(qmax, q);
    esum += neighbor_errors(j);
  }
  const double count = static_cast<double>(ns.size());
  g.neighbor_fraction = count / graph.n;
  g.mean_quality = qsum / count;
  g.max_quality = qmax;
  g.mean_neighbor_error = esum / count;
  g.advantage = std::clamp(g.mean_neighbor_error - own_error, -1.0, 1.0);
  g.role = (g.advantage > 0.0 && confidence >= sem.role_confidence) ? 1.0 : 0.0;
  return g;
}

inline int raw_observation_length(int n_agents) {
  return 18 + 7 * (n_agents - 1);
}

inline int semantic_observation_length(int n_agents) {
  return raw_observation_length(n_agents) + 8 + 4 + 4 + 6;
}

/// Final policy input: [raw | diagnostics(8) | phase(4) | quality(4) |
/// graph(6)].  The groups cover, in order, the physical observation, the
/// sensing/tracking state, the interpreted task state, and the
/// communication/data state of the neighborhood.
inline Eigen::VectorXd assemble_observation(const Eigen::VectorXd& raw,
                                            const TrackingDiagnostics& diag,
                                            TaskPhase phase,
                                            ObservationQuality quality,
                                            const GraphSummary& graph,
                                            int n_agents) {
  if (raw.size() != raw_observation_length(n_agents)) {
    throw LayoutMismatch("raw observation has wrong length");
  }
  Eigen::VectorXd obs(semantic_observation_length(n_agents));
  obs.head(raw.size()) = raw;
  int at = static_cast<int>(raw.size());
  obs.segment<8>(at) = diag.vector();
  at += 8;
  obs.segment<4>(at) = one_hot4(static_cast<int>(phase));
  at += 4;
  obs.segment<4>(at) = one_hot4(static_cast<int>(quality));
  at += 4;
  obs.segment<6>(at) = graph.vector();
  return obs;
}

}  // namespace auvlab
