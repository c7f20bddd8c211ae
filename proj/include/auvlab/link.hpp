#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace auvlab {

enum class LinkMode {
  kSimple,    ///< range-only quality, hard cutoff at comm_radius
  kExtended,  ///< attenuation x loss x staleness product
};

struct LinkParams {
  LinkMode mode = LinkMode::kSimple;
  double comm_radius = 0.45;    ///< workspace units, simple-mode cutoff
  double attenuation = 0.0;     ///< per-unit-distance decay rate
  double staleness_tau = 20.0;  ///< steps; e-folding of stale-message decay
  double packet_loss = 0.0;     ///< Bernoulli drop probability per step
};

/// Range-only link quality: 1 at zero range, linear falloff, 0 at and
/// beyond comm_radius.
inline double link_quality(double distance, const LinkParams& params) {
  return std::clamp(1.0 - distance / params.comm_radius, 0.0, 1.0);
}

/// Degraded-channel link quality: exponential range attenuation times the
/// delivery probability times an exponential penalty on message age.
inline double link_quality_extended(double distance, double age_steps,
                                    const LinkParams& params) {
  return std::exp(-params.attenuation * distance) *
         (1.0 - params.packet_loss) *
         std::exp(-age_steps / params.staleness_tau);
}

struct CommEdge {
  int i = 0;
  int j = 0;
  double quality = 0.0;
};

/// Undirected weighted communication graph over the swarm.  quality is a
/// symmetric matrix with a zero diagonal; edges lists each pair with
/// strictly positive quality once, with i < j.
struct CommGraph {
  int n = 0;
  Eigen::MatrixXd quality;
  std::vector<CommEdge> edges;

  std::vector<int> neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n; ++j) {
      if (j != i && quality(i, j) > 0.0) out.push_back(j);
    }
    return out;
  }

  /// Mean quality over present edges; 0 for an edgeless graph.
  double mean_quality() const {
    if (edges.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : edges) sum += e.quality;
    return sum / static_cast<double>(edges.size());
  }
};

/// Builds the communication graph from agent positions and per-pair
/// message ages (ages are ignored in simple mode).
inline CommGraph build_comm_graph(const std::vector<Eigen::Vector3d>& positions,
                                  const Eigen::MatrixXd& ages,
                                  const LinkParams& params) {
  CommGraph g;
  g.n = static_cast<int>(positions.size());
  g.quality = Eigen::MatrixXd::Zero(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      const double d = (positions[i] - positions[j]).norm();
      const double q = params.mode == LinkMode::kSimple
                           ? link_quality(d, params)
                           : link_quality_extended(d, ages(i, j), params);
      if (q > 0.0) {
        g.quality(i, j) = q;
        g.quality(j, i) = q;
        g.edges.push_back({i, j, q});
      }
    }
  }
  return g;
}

}  // namespace auvlab
