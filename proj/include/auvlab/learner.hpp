#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "auvlab/mlp.hpp"
#include "auvlab/rng.hpp"

namespace auvlab {

struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Optimization hyperparameters.  The numbers are deliberately plain PPO:
/// clipped surrogate, GAE, entropy bonus, Adam with a global-norm clip.
struct PPOConfig {
  double gamma = 0.95;
  double lam = 0.95;
  double learning_rate = 3.0e-4;
  int batch_size = 800;
  double clip_eps = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int epochs = 4;
  double grad_clip = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int rollout_steps = 2000;
  int hidden_units = 128;
  double init_std = 0.5;
};

/// Shared-parameter diagonal-Gaussian policy: an MLP produces the action
/// mean, a learned state-independent log-std vector sets the spread.
/// Samples are clipped to [-1, 1] before execution but log-probs always
/// refer to the pre-clip sample.
struct GaussianActor {
  Mlp net;
  Eigen::VectorXd log_std;

  static GaussianActor make(int obs_dim, int act_dim, const PPOConfig& cfg,
                            Rng& rng) {
    GaussianActor a;
    a.net = Mlp::make({obs_dim, cfg.hidden_units, cfg.hidden_units, act_dim},
                      rng, 0.01);
    a.log_std = Eigen::VectorXd::Constant(act_dim, std::log(cfg.init_std));
    return a;
  }

  int act_dim() const { return static_cast<int>(log_std.size()); }
  long parameter_count() const {
    return net.parameter_count() + log_std.size();
  }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(parameter_count());
    out.head(net.parameter_count()) = net.flatten();
    out.tail(log_std.size()) = log_std;
    return out;
  }

  void set_from_flat(const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count()) {
      throw ShapeMismatch("actor flat parameter vector has wrong length");
    }
    net.set_from_flat(flat.head(net.parameter_count()));
    log_std = flat.tail(log_std.size());
  }
};

inline double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return log_std.size() * 0.5 * std::log(2.0 * M_PI * M_E) + log_std.sum();
}

struct ActorSample {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  Eigen::VectorXd raw;     ///< pre-clip Gaussian sample
  Eigen::VectorXd action;  ///< raw clipped to [-1, 1]
  double log_prob = 0.0;
  double entropy = 0.0;
};

/// One stochastic policy query.  Noise components are drawn in action
/// index order so trajectories are reproducible.
inline ActorSample actor_forward(const GaussianActor& actor,
                                 const Eigen::VectorXd& obs, Rng& rng) {
  ActorSample s;
  s.mean = mlp_forward(actor.net, obs);
  s.std = actor.log_std.array().exp();
  s.raw.resize(s.mean.size());
  for (int k = 0; k < s.raw.size(); ++k) {
    s.raw(k) = s.mean(k) + s.std(k) * rng.normal();
  }
  s.action = s.raw.cwiseMax(-1.0).cwiseMin(1.0);
  const Eigen::ArrayXd z = (s.raw - s.mean).array() / s.std.array();
  s.log_prob = -0.5 * z.square().sum() - actor.log_std.sum() -
               0.5 * s.raw.size() * std::log(2.0 * M_PI);
  s.entropy = gaussian_entropy(actor.log_std);
  return s;
}

/// Deterministic policy output used by evaluation: the mean, clipped to
/// the valid action box.
inline Eigen::VectorXd actor_mean_action(const GaussianActor& actor,
                                         const Eigen::VectorXd& obs) {
  return mlp_forward(actor.net, obs).cwiseMax(-1.0).cwiseMin(1.0);
}

inline double critic_forward(const Mlp& critic,
                             const Eigen::VectorXd& joint_obs) {
  return mlp_forward(critic, joint_obs)(0, 0);
}

/// On-policy storage for one update.  Per-agent streams share the step's
/// joint observation, value, and scalar reward; columns are ordered
/// (step, agent) with the agent index fastest.
struct RolloutBuffer {
  int n_agents = 0, obs_dim = 0, act_dim = 0, joint_dim = 0;
  int capacity = 0, size = 0;
  Eigen::MatrixXd agent_obs;
  Eigen::MatrixXd actions;
  Eigen::VectorXd log_probs;
  Eigen::MatrixXd joint_obs;
  Eigen::VectorXd values;
  Eigen::VectorXd rewards;
  std::vector<std::uint8_t> dones;
  double bootstrap_value = 0.0;

  void reset(int capacity_steps, int agents, int obs, int act, int joint) {
    n_agents = agents;
    obs_dim = obs;
    act_dim = act;
    joint_dim = joint;
    capacity = capacity_steps;
    size = 0;
    agent_obs.resize(obs_dim, static_cast<long>(capacity) * n_agents);
    actions.resize(act_dim, static_cast<long>(capacity) * n_agents);
    log_probs.resize(static_cast<long>(capacity) * n_agents);
    joint_obs.resize(joint_dim, capacity);
    values.resize(capacity);
    rewards.resize(capacity);
    dones.assign(capacity, 0);
  }

  void push(const std::vector<Eigen::VectorXd>& obs,
            const std::vector<ActorSample>& samples,
            const Eigen::VectorXd& joint, double value, double reward,
            bool done) {
    const long col = static_cast<long>(size) * n_agents;
    for (int i = 0; i < n_agents; ++i) {
      agent_obs.col(col + i) = obs[i];
      actions.col(col + i) = samples[i].raw;
      log_probs(col + i) = samples[i].log_prob;
    }
    joint_obs.col(size) = joint;
    values(size) = value;
    rewards(size) = reward;
    dones[size] = done ? 1 : 0;
    ++size;
  }
};

/// Generalized advantage estimation over a rollout that may span several
/// episodes; `dones[t] = 1` marks that step t ended its episode, so
/// neither the TD residual nor the advantage recursion reaches past it.
/// Returns (advantages, returns) with returns = advantages + values.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_gae(
    const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
    double bootstrap_value, const std::vector<std::uint8_t>& dones,
    double gamma, double lam) {
  const long t_max = rewards.size();
  if (values.size() != t_max || static_cast<long>(dones.size()) != t_max) {
    throw LengthMismatch("gae inputs must have equal length");
  }
  Eigen::VectorXd adv(t_max);
  double last = 0.0;
  for (long t = t_max - 1; t >= 0; --t) {
    const double cont = dones[t] ? 0.0 : 1.0;
    const double next_v =
        t + 1 < t_max ? values(t + 1) : bootstrap_value;
    const double delta = rewards(t) + gamma * cont * next_v - values(t);
    last = delta + gamma * lam * cont * last;
    adv(t) = last;
  }
  return {adv, adv + values};
}

struct LossReport {
  double actor_loss = 0.0;   ///< negative clipped surrogate
  double critic_loss = 0.0;  ///< value MSE (before value_coef)
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

struct ActorGradResult {
  double surrogate_loss = 0.0;  ///< -mean(min(r A, clip(r) A))
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  Eigen::VectorXd grad;  ///< d(total actor loss)/d(flat actor params)
};

/// Loss and analytic gradient of the actor objective
///   L = -mean_s min(r_s A_s, clip(r_s, 1 +- eps) A_s) - beta * H(pi)
/// on one minibatch.  Column s of `obs`/`actions` is one (agent, step)
/// sample; advantages are shared across the agents of a step.
inline ActorGradResult actor_loss_and_grad(const GaussianActor& actor,
                                           const Eigen::MatrixXd& obs,
                                           const Eigen::MatrixXd& actions,
                                           const Eigen::VectorXd& advantages,
                                           const Eigen::VectorXd& log_probs_old,
                                           const PPOConfig& cfg) {
  const long batch = obs.cols();
  MlpCache cache;
  const Eigen::MatrixXd mean = mlp_forward(actor.net, obs, &cache);
  const Eigen::ArrayXd sigma = actor.log_std.array().exp();

  const Eigen::ArrayXXd z =
      (actions - mean).array().colwise() / sigma;
  const double log_norm = actor.log_std.sum() +
                          0.5 * actor.act_dim() * std::log(2.0 * M_PI);
  const Eigen::ArrayXd logp_new =
      -0.5 * z.square().colwise().sum().transpose() - log_norm;
  const Eigen::ArrayXd ratio = (logp_new - log_probs_old.array()).exp();

  ActorGradResult out;
  out.entropy = gaussian_entropy(actor.log_std);
  out.approx_kl = (log_probs_old.array() - logp_new).mean();
  out.clip_fraction =
      ((ratio - 1.0).abs() > cfg.clip_eps).cast<double>().mean();

  const Eigen::ArrayXd clipped =
      ratio.min(1.0 + cfg.clip_eps).max(1.0 - cfg.clip_eps);
  const Eigen::ArrayXd surr1 = ratio * advantages.array();
  const Eigen::ArrayXd surr2 = clipped * advantages.array();
  out.surrogate_loss = -surr1.min(surr2).mean();

  // d(surrogate)/d(logp_new): the active min branch, zero when clipped.
  Eigen::ArrayXd g = Eigen::ArrayXd::Zero(batch);
  for (long s = 0; s < batch; ++s) {
    if (surr1(s) <= surr2(s)) {
      g(s) = -advantages(s) * ratio(s) / static_cast<double>(batch);
    }
  }

  // dL/dmean_ks = g_s * z_ks / sigma_k, dL/dlogstd_k =
  // sum_s g_s (z_ks^2 - 1) - beta (the entropy bonus term).
  const Eigen::MatrixXd dmean =
      ((z.colwise() / sigma).rowwise() * g.transpose()).matrix();
  MlpGrads net_grads = MlpGrads::zeros_like(actor.net);
  mlp_backward(actor.net, cache, dmean, net_grads);

  Eigen::VectorXd dlog_std =
      ((z.square() - 1.0).rowwise() * g.transpose()).rowwise().sum().matrix();
  dlog_std.array() -= cfg.entropy_coef;

  out.grad.resize(actor.parameter_count());
  out.grad.head(actor.net.parameter_count()) = net_grads.flatten();
  out.grad.tail(dlog_std.size()) = dlog_std;
  return out;
}

struct CriticGradResult {
  double mse = 0.0;
  Eigen::VectorXd grad;  ///< value_coef-scaled, d/d(flat critic params)
};

inline CriticGradResult critic_loss_and_grad(const Mlp& critic,
                                             const Eigen::MatrixXd& joint_obs,
                                             const Eigen::VectorXd& targets,
                                             const PPOConfig& cfg) {
  const long batch = joint_obs.cols();
  MlpCache cache;
  const Eigen::MatrixXd v = mlp_forward(critic, joint_obs, &cache);
  const Eigen::ArrayXd err = v.row(0).transpose().array() - targets.array();

  CriticGradResult out;
  out.mse = err.square().mean();
  const Eigen::MatrixXd dv =
      (cfg.value_coef * 2.0 / static_cast<double>(batch)) *
      err.matrix().transpose();
  MlpGrads grads = MlpGrads::zeros_like(critic);
  mlp_backward(critic, cache, dv, grads);
  out.grad = grads.flatten();
  return out;
}

inline std::vector<long> shuffled_indices(long n, Rng& rng) {
  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (long i = n - 1; i > 0; --i) {
    const long j = static_cast<long>(rng.next_u64() % (i + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

/// One PPO update over a collected rollout: advantages via GAE
/// (normalized per update), then `epochs` passes of minibatch Adam steps
/// on the clipped actor objective and the value regression.  Throws
/// NonFiniteGradient if any gradient diverges; parameters keep their last
/// consistent values in that case.
inline LossReport ppo_update(const RolloutBuffer& buffer, GaussianActor& actor,
                             Mlp& critic, AdamOptimizer& actor_opt,
                             AdamOptimizer& critic_opt, const PPOConfig& cfg,
                             Rng& rng) {
  if (buffer.size == 0) throw LengthMismatch("empty rollout buffer");
  const long t_max = buffer.size;
  const long samples = t_max * buffer.n_agents;

  auto [adv, ret] = compute_gae(buffer.rewards.head(t_max),
                                buffer.values.head(t_max),
                                buffer.bootstrap_value, buffer.dones,
                                cfg.gamma, cfg.lam);
  const double adv_mean = adv.mean();
  const double adv_std =
      std::sqrt((adv.array() - adv_mean).square().sum() / adv.size());
  const Eigen::VectorXd adv_norm =
      ((adv.array() - adv_mean) / (adv_std + 1e-8)).matrix();

  Eigen::VectorXd actor_params = actor.flatten();
  Eigen::VectorXd critic_params = critic.flatten();

  LossReport report;
  long actor_batches = 0, critic_batches = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled_indices(samples, rng);
    for (long start = 0; start < samples; start += cfg.batch_size) {
      const long count = std::min<long>(cfg.batch_size, samples - start);
      Eigen::MatrixXd obs(buffer.obs_dim, count);
      Eigen::MatrixXd act(buffer.act_dim, count);
      Eigen::VectorXd a(count), lp(count);
      for (long s = 0; s < count; ++s) {
        const long col = order[start + s];
        obs.col(s) = buffer.agent_obs.col(col);
        act.col(s) = buffer.actions.col(col);
        a(s) = adv_norm(col / buffer.n_agents);
        lp(s) = buffer.log_probs(col);
      }
      const auto res = actor_loss_and_grad(actor, obs, act, a, lp, cfg);
      actor_opt.step(actor_params, res.grad, cfg.learning_rate, cfg.grad_clip,
                     cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
      actor.set_from_flat(actor_params);
      report.actor_loss += res.surrogate_loss;
      report.entropy += res.entropy;
      report.clip_fraction += res.clip_fraction;
      report.approx_kl += res.approx_kl;
      ++actor_batches;
    }

    const auto vorder = shuffled_indices(t_max, rng);
    for (long start = 0; start < t_max; start += cfg.batch_size) {
      const long count = std::min<long>(cfg.batch_size, t_max - start);
      Eigen::MatrixXd joint(buffer.joint_dim, count);
      Eigen::VectorXd target(count);
      for (long s = 0; s < count; ++s) {
        joint.col(s) = buffer.joint_obs.col(vorder[start + s]);
        target(s) = ret(vorder[start + s]);
      }
      const auto res = critic_loss_and_grad(critic, joint, target, cfg);
      critic_opt.step(critic_params, res.grad, cfg.learning_rate,
                      cfg.grad_clip, cfg.adam_beta1, cfg.adam_beta2,
                      cfg.adam_eps);
      critic.set_from_flat(critic_params);
      report.critic_loss += res.mse;
      ++critic_batches;
    }
  }

  report.actor_loss /= actor_batches;
  report.entropy /= actor_batches;
  report.clip_fraction /= actor_batches;
  report.approx_kl /= actor_batches;
  report.critic_loss /= critic_batches;
  return report;
}

}  // namespace auvlab
