#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace auvlab {

struct EmptyTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-step record of one evaluation episode, enough to recompute every
/// reported metric offline.  Matrices are (steps x agents).
struct EpisodeTrace {
  int n_agents = 0;
  int action_dim = 0;
  double desired_distance = 0.0;
  std::vector<double> rewards;       ///< global reward per step
  std::vector<double> comm_quality;  ///< mean link quality per step
  Eigen::MatrixXd distances;
  Eigen::MatrixXd lost;              ///< 0/1 flags
  Eigen::MatrixXd saturated;         ///< executed components at |a| >= 0.99
  Eigen::MatrixXd cost;              ///< per-agent action cost

  int steps() const { return static_cast<int>(rewards.size()); }
};

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Evaluation metrics, each mean and standard deviation over episodes.
struct MetricRecord {
  MetricStat eval_return;
  MetricStat tail_distance;
  MetricStat tracking_error;
  MetricStat lost_rate;
  MetricStat saturation;
  MetricStat control_cost;
  MetricStat comm_quality;
};

namespace detail {

inline MetricStat stat_over(const std::vector<double>& xs) {
  MetricStat s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / n);
  return s;
}

}  // namespace detail

/// Number of trailing steps the settled-distance metric averages over.
constexpr int kTailWindow = 100;

/// Aggregates evaluation episodes into the reported metric set:
///   eval_return     undiscounted sum of global rewards
///   tail_distance   mean distance over the final window, all agents
///   tracking_error  mean |d - d*| over all steps and agents
///   lost_rate       fraction of (step, agent) pairs with the target lost
///   saturation      fraction of executed action components at the box edge
///   control_cost    mean per-agent action cost
///   comm_quality    mean link quality
inline MetricRecord compute_metrics(const std::vector<EpisodeTrace>& traces) {
  if (traces.empty()) throw EmptyTrace("no evaluation episodes to aggregate");
  std::vector<double> returns, tails, errors, lost_rates, saturations, costs,
      comms;
  for (const EpisodeTrace& tr : traces) {
    const int t_max = tr.steps();
    if (t_max == 0 || tr.n_agents == 0) {
      throw EmptyTrace("evaluation episode holds no steps");
    }
    double ret = 0.0;
    for (double r : tr.rewards) ret += r;
    returns.push_back(ret);

    const int tail = std::min(kTailWindow, t_max);
    tails.push_back(
        tr.distances.bottomRows(tail).mean());
    errors.push_back(
        (tr.distances.array() - tr.desired_distance).abs().mean());
    lost_rates.push_back(tr.lost.mean());
    saturations.push_back(tr.saturated.sum() /
                          (static_cast<double>(t_max) * tr.n_agents *
                           tr.action_dim));
    costs.push_back(tr.cost.mean());
    double comm = 0.0;
    for (double q : tr.comm_quality) comm += q;
    comms.push_back(comm / t_max);
  }
  MetricRecord out;
  out.eval_return = detail::stat_over(returns);
  out.tail_distance = detail::stat_over(tails);
  out.tracking_error = detail::stat_over(errors);
  out.lost_rate = detail::stat_over(lost_rates);
  out.saturation = detail::stat_over(saturations);
  out.control_cost = detail::stat_over(costs);
  out.comm_quality = detail::stat_over(comms);
  return out;
}

/// Fixed column layout shared by the metric history CSV, the evaluation
/// table, and the stress table.
inline const std::vector<std::string>& metric_column_names() {
  static const std::vector<std::string> names = {
      "eval_return_mean",    "eval_return_std",  "tail_distance_mean",
      "tail_distance_std",   "tracking_error_mean", "tracking_error_std",
      "lost_rate_mean",      "lost_rate_std",    "saturation_mean",
      "saturation_std",      "control_cost_mean", "control_cost_std",
      "comm_quality_mean",   "comm_quality_std"};
  return names;
}

inline std::vector<double> metric_column_values(const MetricRecord& m) {
  return {m.eval_return.mean,    m.eval_return.stddev,
          m.tail_distance.mean,  m.tail_distance.stddev,
          m.tracking_error.mean, m.tracking_error.stddev,
          m.lost_rate.mean,      m.lost_rate.stddev,
          m.saturation.mean,     m.saturation.stddev,
          m.control_cost.mean,   m.control_cost.stddev,
          m.comm_quality.mean,   m.comm_quality.stddev};
}

}  // namespace auvlab
