#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "auvlab/action.hpp"
#include "auvlab/environment.hpp"
#include "auvlab/ini.hpp"
#include "auvlab/learner.hpp"
#include "auvlab/reward.hpp"
#include "auvlab/semantics.hpp"

namespace auvlab {

struct UnknownVariant : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Which observation each agent receives: the raw kinematic vector, or
/// the raw vector extended with diagnostics, phase, quality, and graph
/// summary blocks.
enum class ObsMode { kRaw = 0, kSemantic };

/// One row of the ablation table: observation content, action interface,
/// and whether the phase-conditioned reward term is active.
struct VariantWiring {
  ObsMode obs = ObsMode::kSemantic;
  ActionMode action = ActionMode::kVelocity3;
  bool semantic_reward = true;
};

inline VariantWiring variant_wiring(const std::string& variant) {
  if (variant == "stg_full") {
    return {ObsMode::kSemantic, ActionMode::kVelocity3, true};
  }
  if (variant == "mappo_semantic_state") {
    return {ObsMode::kSemantic, ActionMode::kVelocity3, false};
  }
  if (variant == "mappo_velocity3") {
    return {ObsMode::kRaw, ActionMode::kVelocity3, false};
  }
  if (variant == "mappo_raw_tau6") {
    return {ObsMode::kRaw, ActionMode::kRaw6, false};
  }
  throw UnknownVariant("unknown variant: " + variant);
}

inline const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {
      "stg_full", "mappo_semantic_state", "mappo_velocity3", "mappo_raw_tau6"};
  return names;
}

/// Run-level bookkeeping: what to train, for how long, where to write.
struct RunSettings {
  std::string scenario = "medium";
  std::string variant = "stg_full";
  std::vector<long> seeds = {0, 1, 2};
  long budget = 2000000;       ///< environment steps per seed
  long eval_interval = 5000;   ///< steps between evaluation rounds
  int eval_episodes = 3;
  std::string out_dir = "runs";
  bool diagnostics = true;     ///< per-step JSONL reward/info logging
};

/// Full configuration of one run, one struct per config-file section.
/// `action_mode` and `reward.w_sem` are rewritten by the variant, and
/// the environment copies of dt / world_scale / history window are the
/// single sources the dynamics and semantics layers inherit.
struct RunConfig {
  RunSettings run;
  EnvConfig env;
  RigidBodyParams dynamics = RigidBodyParams::defaults();
  ActionMode action_mode = ActionMode::kVelocity3;
  ControllerGains controller;
  SemanticsConfig semantics;
  RewardWeights reward;
  PPOConfig ppo;
};

inline RunConfig default_run_config() { return RunConfig{}; }

inline std::string action_mode_name(ActionMode mode) {
  return mode == ActionMode::kVelocity3 ? "velocity3" : "raw6";
}

inline ActionMode parse_action_mode(const std::string& name) {
  if (name == "velocity3") return ActionMode::kVelocity3;
  if (name == "raw6") return ActionMode::kRaw6;
  throw ConfigError("unknown controller mode: " + name);
}

inline std::string link_mode_name(LinkMode mode) {
  return mode == LinkMode::kSimple ? "simple" : "extended";
}

inline LinkMode parse_link_mode(const std::string& name) {
  if (name == "simple") return LinkMode::kSimple;
  if (name == "extended") return LinkMode::kExtended;
  throw ConfigError("unknown link mode: " + name);
}

inline ResetProfile scenario_profile(const std::string& scenario) {
  if (scenario == "medium") return ResetProfile::medium();
  if (scenario == "hard") return ResetProfile::hard();
  throw ConfigError("unknown scenario: " + scenario);
}

namespace detail {

inline Vector6d vector6(const std::vector<double>& v) {
  Vector6d out;
  for (int i = 0; i < 6; ++i) out(i) = v[i];
  return out;
}

inline std::vector<double> to_list(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

/// Known-key tables, one per section; load() rejects anything else so a
/// typo in a config file fails instead of silently using a default.
inline const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"run",
       {"scenario", "variant", "seeds", "budget", "eval_interval",
        "eval_episodes", "out_dir", "diagnostics"}},
      {"environment",
       {"n_agents", "horizon", "dt", "workspace_half", "desired_distance",
        "sensing_range", "loss_threshold", "min_separation", "world_scale",
        "target_sigma_turn", "target_speed_factor", "disturbance_sigma"}},
      {"link",
       {"mode", "comm_radius", "attenuation", "staleness_tau", "packet_loss"}},
      {"dynamics",
       {"inertia", "damping_linear", "damping_quadratic", "restoring_gain",
        "wrench_cap", "velocity_cap", "pitch_guard"}},
      {"controller",
       {"mode", "velocity_scale", "smoothing", "rate_limit", "velocity_gain",
        "attitude_gain", "rate_gain", "raw_scale"}},
      {"semantics",
       {"e_max", "quality_high", "quality_medium", "role_confidence", "d_near",
        "k"}},
      {"reward",
       {"band_lower", "band_upper", "e_max", "w_band", "w_improve", "w_close",
        "w_reacq", "w_crowd", "w_track", "w_obs", "w_coord", "w_comm", "w_sem",
        "w_action"}},
      {"ppo",
       {"gamma", "lam", "learning_rate", "batch_size", "clip_eps",
        "entropy_coef", "value_coef", "epochs", "grad_clip", "adam_beta1",
        "adam_beta2", "adam_eps", "rollout_steps", "hidden_units",
        "init_std"}},
      {"stress",
       {"target_speed", "far_init", "sensing", "packet_loss", "attenuation"}},
  };
  return keys;
}

inline void reject_unknown(const IniDocument& ini) {
  std::vector<std::string> problems;
  const auto& known = known_keys();
  for (const auto& section : ini.sections()) {
    const auto it = known.find(section);
    if (it == known.end()) {
      problems.push_back("unknown section [" + section + "]");
      continue;
    }
    for (const auto& key : ini.keys(section)) {
      bool found = false;
      for (const auto& k : it->second) found = found || k == key;
      if (!found) {
        problems.push_back("unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
  if (!problems.empty()) {
    std::string joined;
    for (size_t i = 0; i < problems.size(); ++i) {
      if (i) joined += "; ";
      joined += problems[i];
    }
    throw ConfigError(joined);
  }
}

}  // namespace detail

/// Applies the scenario, the variant wiring, and the cross-section field
/// propagation (dt, world_scale, history window).  Every load path ends
/// here so the sub-configs can never drift apart.
inline void resolve_run_config(RunConfig& cfg) {
  cfg.env.profile = scenario_profile(cfg.run.scenario);
  const VariantWiring wiring = variant_wiring(cfg.run.variant);
  cfg.action_mode = wiring.action;
  if (!wiring.semantic_reward) cfg.reward.w_sem = 0.0;
  cfg.dynamics.dt = cfg.env.episode.dt;
  cfg.dynamics.world_scale = cfg.env.episode.world_scale;
  cfg.env.episode.history_window = cfg.semantics.history_window;
}

/// Collects every problem before throwing so one round trip fixes a bad
/// file.  Runs before any compute; a config that passes here cannot
/// surprise the trainer mid-run.
inline void validate_run_config(const RunConfig& cfg) {
  std::vector<std::string> problems;
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };

  const RunSettings& run = cfg.run;
  check(run.scenario == "medium" || run.scenario == "hard",
        "run.scenario must be 'medium' or 'hard'");
  try {
    variant_wiring(run.variant);
  } catch (const UnknownVariant&) {
    problems.push_back("run.variant is not a known variant: " + run.variant);
  }
  check(!run.seeds.empty(), "run.seeds must list at least one seed");
  check(run.budget >= 1, "run.budget must be positive");
  check(run.eval_interval >= 1, "run.eval_interval must be positive");
  check(run.budget >= run.eval_interval,
        "run.budget must cover at least one eval interval");
  check(run.eval_episodes >= 1, "run.eval_episodes must be positive");
  check(!run.out_dir.empty(), "run.out_dir must be set");

  const EpisodeConfig& ep = cfg.env.episode;
  check(ep.n_agents >= 2, "environment.n_agents must be at least 2");
  check(ep.horizon >= 1, "environment.horizon must be positive");
  check(ep.dt > 0.0, "environment.dt must be positive");
  check(ep.workspace_half > 0.0, "environment.workspace_half must be positive");
  check(ep.desired_distance > 0.0,
        "environment.desired_distance must be positive");
  check(ep.sensing_range > ep.desired_distance,
        "environment.sensing_range must exceed the desired distance");
  check(ep.loss_threshold > ep.sensing_range,
        "environment.loss_threshold must exceed the sensing range");
  check(ep.min_separation >= 0.0,
        "environment.min_separation must be non-negative");
  check(ep.world_scale > 0.0, "environment.world_scale must be positive");
  check(ep.target_sigma_turn >= 0.0,
        "environment.target_sigma_turn must be non-negative");
  check(ep.target_speed_factor > 0.0,
        "environment.target_speed_factor must be positive");
  check(ep.disturbance_sigma >= 0.0,
        "environment.disturbance_sigma must be non-negative");

  const LinkParams& link = cfg.env.link;
  check(link.comm_radius > 0.0, "link.comm_radius must be positive");
  check(link.attenuation >= 0.0, "link.attenuation must be non-negative");
  check(link.staleness_tau > 0.0, "link.staleness_tau must be positive");
  check(link.packet_loss >= 0.0 && link.packet_loss <= 1.0,
        "link.packet_loss must lie in [0, 1]");

  const RigidBodyParams& dyn = cfg.dynamics;
  check(dyn.inertia.minCoeff() > 0.0, "dynamics.inertia must be positive");
  check(dyn.damping_linear.minCoeff() >= 0.0,
        "dynamics.damping_linear must be non-negative");
  check(dyn.damping_quadratic.minCoeff() >= 0.0,
        "dynamics.damping_quadratic must be non-negative");
  check(dyn.restoring_gain >= 0.0,
        "dynamics.restoring_gain must be non-negative");
  check(dyn.wrench_cap.minCoeff() > 0.0, "dynamics.wrench_cap must be positive");
  check(dyn.velocity_cap.minCoeff() > 0.0,
        "dynamics.velocity_cap must be positive");
  check(dyn.pitch_guard > 0.0 && dyn.pitch_guard < M_PI / 2.0,
        "dynamics.pitch_guard must lie in (0, pi/2)");

  const ControllerGains& ctl = cfg.controller;
  check(ctl.velocity_scale > 0.0, "controller.velocity_scale must be positive");
  check(ctl.smoothing >= 0.0 && ctl.smoothing < 1.0,
        "controller.smoothing must lie in [0, 1)");
  check(ctl.rate_limit > 0.0, "controller.rate_limit must be positive");
  check(ctl.velocity_gain.minCoeff() > 0.0,
        "controller.velocity_gain must be positive");
  check(ctl.attitude_gain.minCoeff() >= 0.0,
        "controller.attitude_gain must be non-negative");
  check(ctl.rate_gain.minCoeff() >= 0.0,
        "controller.rate_gain must be non-negative");
  check(ctl.raw_scale > 0.0 && ctl.raw_scale <= 1.0,
        "controller.raw_scale must lie in (0, 1]");

  const SemanticsConfig& sem = cfg.semantics;
  check(sem.e_max > 0.0, "semantics.e_max must be positive");
  check(sem.quality_medium > 0.0 && sem.quality_high > sem.quality_medium &&
            sem.quality_high < 1.0,
        "semantics quality thresholds must satisfy 0 < medium < high < 1");
  check(sem.role_confidence >= 0.0 && sem.role_confidence <= 1.0,
        "semantics.role_confidence must lie in [0, 1]");
  check(sem.d_near > 0.0, "semantics.d_near must be positive");
  check(sem.history_window >= 1, "semantics.k must be at least 1");

  const RewardWeights& w = cfg.reward;
  check(w.band_lower >= 0.0 && w.band_upper > w.band_lower,
        "reward band must satisfy 0 <= band_lower < band_upper");
  check(w.band_lower < ep.desired_distance &&
            ep.desired_distance < w.band_upper,
        "reward band must straddle environment.desired_distance");
  check(w.e_max > 0.0, "reward.e_max must be positive");
  const std::pair<double, const char*> weight_entries[] = {
      {w.w_band, "w_band"},   {w.w_improve, "w_improve"},
      {w.w_close, "w_close"}, {w.w_reacq, "w_reacq"},
      {w.w_crowd, "w_crowd"}, {w.w_track, "w_track"},
      {w.w_obs, "w_obs"},     {w.w_coord, "w_coord"},
      {w.w_comm, "w_comm"},   {w.w_sem, "w_sem"},
      {w.w_action, "w_action"}};
  for (const auto& [value, name] : weight_entries) {
    check(value >= 0.0, std::string("reward.") + name + " must be non-negative");
  }
  check(w.w_track >=
            std::max({w.w_obs, w.w_coord, w.w_comm, w.w_sem, w.w_action}),
        "reward.w_track must be at least as large as every other global weight");
  check(0.25 * w.w_sem <= w.w_coord + w.w_comm,
        "reward.w_sem / 4 must not exceed w_coord + w_comm, or the global "
        "reward can leave the weight-sum bound");

  const PPOConfig& ppo = cfg.ppo;
  check(ppo.gamma > 0.0 && ppo.gamma < 1.0, "ppo.gamma must lie in (0, 1)");
  check(ppo.lam > 0.0 && ppo.lam <= 1.0, "ppo.lam must lie in (0, 1]");
  check(ppo.learning_rate >= 0.0, "ppo.learning_rate must be non-negative");
  check(ppo.batch_size >= 1, "ppo.batch_size must be positive");
  check(ppo.clip_eps > 0.0, "ppo.clip_eps must be positive");
  check(ppo.entropy_coef >= 0.0, "ppo.entropy_coef must be non-negative");
  check(ppo.value_coef >= 0.0, "ppo.value_coef must be non-negative");
  check(ppo.epochs >= 1, "ppo.epochs must be positive");
  check(ppo.grad_clip > 0.0, "ppo.grad_clip must be positive");
  check(ppo.adam_beta1 >= 0.0 && ppo.adam_beta1 < 1.0,
        "ppo.adam_beta1 must lie in [0, 1)");
  check(ppo.adam_beta2 >= 0.0 && ppo.adam_beta2 < 1.0,
        "ppo.adam_beta2 must lie in [0, 1)");
  check(ppo.adam_eps > 0.0, "ppo.adam_eps must be positive");
  check(ppo.rollout_steps >= 1, "ppo.rollout_steps must be positive");
  check(ppo.hidden_units >= 1, "ppo.hidden_units must be positive");
  check(ppo.init_std > 0.0, "ppo.init_std must be positive");

  const StressScales& st = cfg.env.stress;
  check(st.target_speed > 0.0, "stress.target_speed must be positive");
  check(st.far_init > 0.0, "stress.far_init must be positive");
  check(st.sensing > 0.0, "stress.sensing must be positive");
  check(st.packet_loss >= 0.0 && st.packet_loss <= 1.0,
        "stress.packet_loss must lie in [0, 1]");
  check(st.attenuation >= 0.0, "stress.attenuation must be non-negative");

  if (!problems.empty()) {
    std::string joined;
    for (size_t i = 0; i < problems.size(); ++i) {
      if (i) joined += "; ";
      joined += problems[i];
    }
    throw ConfigError(joined);
  }
}

/// Overlays a parsed document onto the defaults.  Missing keys keep the
/// default; unknown keys or sections are rejected up front.  The result
/// is resolved (scenario, variant, shared fields) and validated.
inline RunConfig run_config_from_ini(const IniDocument& ini) {
  detail::reject_unknown(ini);
  RunConfig cfg = default_run_config();

  const auto str = [&](const char* s, const char* k, std::string& out) {
    if (ini.has(s, k)) out = ini.get(s, k);
  };
  const auto num = [&](const char* s, const char* k, double& out) {
    if (ini.has(s, k)) out = ini.get_double(s, k);
  };
  const auto integer = [&](const char* s, const char* k, int& out) {
    if (ini.has(s, k)) out = static_cast<int>(ini.get_long(s, k));
  };
  const auto longint = [&](const char* s, const char* k, long& out) {
    if (ini.has(s, k)) out = ini.get_long(s, k);
  };
  const auto vec6 = [&](const char* s, const char* k, Vector6d& out) {
    if (ini.has(s, k)) out = detail::vector6(ini.get_doubles(s, k, 6));
  };

  str("run", "scenario", cfg.run.scenario);
  str("run", "variant", cfg.run.variant);
  if (ini.has("run", "seeds")) cfg.run.seeds = ini.get_longs("run", "seeds");
  longint("run", "budget", cfg.run.budget);
  longint("run", "eval_interval", cfg.run.eval_interval);
  integer("run", "eval_episodes", cfg.run.eval_episodes);
  str("run", "out_dir", cfg.run.out_dir);
  if (ini.has("run", "diagnostics")) {
    cfg.run.diagnostics = ini.get_bool("run", "diagnostics");
  }

  EpisodeConfig& ep = cfg.env.episode;
  integer("environment", "n_agents", ep.n_agents);
  integer("environment", "horizon", ep.horizon);
  num("environment", "dt", ep.dt);
  num("environment", "workspace_half", ep.workspace_half);
  num("environment", "desired_distance", ep.desired_distance);
  num("environment", "sensing_range", ep.sensing_range);
  num("environment", "loss_threshold", ep.loss_threshold);
  num("environment", "min_separation", ep.min_separation);
  num("environment", "world_scale", ep.world_scale);
  num("environment", "target_sigma_turn", ep.target_sigma_turn);
  num("environment", "target_speed_factor", ep.target_speed_factor);
  num("environment", "disturbance_sigma", ep.disturbance_sigma);

  LinkParams& link = cfg.env.link;
  if (ini.has("link", "mode")) {
    link.mode = parse_link_mode(ini.get("link", "mode"));
  }
  num("link", "comm_radius", link.comm_radius);
  num("link", "attenuation", link.attenuation);
  num("link", "staleness_tau", link.staleness_tau);
  num("link", "packet_loss", link.packet_loss);

  RigidBodyParams& dyn = cfg.dynamics;
  vec6("dynamics", "inertia", dyn.inertia);
  vec6("dynamics", "damping_linear", dyn.damping_linear);
  vec6("dynamics", "damping_quadratic", dyn.damping_quadratic);
  num("dynamics", "restoring_gain", dyn.restoring_gain);
  vec6("dynamics", "wrench_cap", dyn.wrench_cap);
  vec6("dynamics", "velocity_cap", dyn.velocity_cap);
  num("dynamics", "pitch_guard", dyn.pitch_guard);

  ControllerGains& ctl = cfg.controller;
  if (ini.has("controller", "mode")) {
    cfg.action_mode = parse_action_mode(ini.get("controller", "mode"));
  }
  num("controller", "velocity_scale", ctl.velocity_scale);
  num("controller", "smoothing", ctl.smoothing);
  num("controller", "rate_limit", ctl.rate_limit);
  if (ini.has("controller", "velocity_gain")) {
    const auto v = ini.get_doubles("controller", "velocity_gain", 3);
    ctl.velocity_gain = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  if (ini.has("controller", "attitude_gain")) {
    const auto v = ini.get_doubles("controller", "attitude_gain", 2);
    ctl.attitude_gain = Eigen::Vector2d(v[0], v[1]);
  }
  if (ini.has("controller", "rate_gain")) {
    const auto v = ini.get_doubles("controller", "rate_gain", 3);
    ctl.rate_gain = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  num("controller", "raw_scale", ctl.raw_scale);

  SemanticsConfig& sem = cfg.semantics;
  num("semantics", "e_max", sem.e_max);
  num("semantics", "quality_high", sem.quality_high);
  num("semantics", "quality_medium", sem.quality_medium);
  num("semantics", "role_confidence", sem.role_confidence);
  num("semantics", "d_near", sem.d_near);
  integer("semantics", "k", sem.history_window);

  RewardWeights& w = cfg.reward;
  num("reward", "band_lower", w.band_lower);
  num("reward", "band_upper", w.band_upper);
  num("reward", "e_max", w.e_max);
  num("reward", "w_band", w.w_band);
  num("reward", "w_improve", w.w_improve);
  num("reward", "w_close", w.w_close);
  num("reward", "w_reacq", w.w_reacq);
  num("reward", "w_crowd", w.w_crowd);
  num("reward", "w_track", w.w_track);
  num("reward", "w_obs", w.w_obs);
  num("reward", "w_coord", w.w_coord);
  num("reward", "w_comm", w.w_comm);
  num("reward", "w_sem", w.w_sem);
  num("reward", "w_action", w.w_action);

  PPOConfig& ppo = cfg.ppo;
  num("ppo", "gamma", ppo.gamma);
  num("ppo", "lam", ppo.lam);
  num("ppo", "learning_rate", ppo.learning_rate);
  integer("ppo", "batch_size", ppo.batch_size);
  num("ppo", "clip_eps", ppo.clip_eps);
  num("ppo", "entropy_coef", ppo.entropy_coef);
  num("ppo", "value_coef", ppo.value_coef);
  integer("ppo", "epochs", ppo.epochs);
  num("ppo", "grad_clip", ppo.grad_clip);
  num("ppo", "adam_beta1", ppo.adam_beta1);
  num("ppo", "adam_beta2", ppo.adam_beta2);
  num("ppo", "adam_eps", ppo.adam_eps);
  integer("ppo", "rollout_steps", ppo.rollout_steps);
  integer("ppo", "hidden_units", ppo.hidden_units);
  num("ppo", "init_std", ppo.init_std);

  StressScales& st = cfg.env.stress;
  num("stress", "target_speed", st.target_speed);
  num("stress", "far_init", st.far_init);
  num("stress", "sensing", st.sensing);
  num("stress", "packet_loss", st.packet_loss);
  num("stress", "attenuation", st.attenuation);

  resolve_run_config(cfg);
  validate_run_config(cfg);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  return run_config_from_ini(IniDocument::load(path));
}

/// Full snapshot of a resolved config; loading the result reproduces the
/// same RunConfig.  The [controller] mode key records the variant's
/// resolved choice, which variant wiring re-imposes on load anyway.
inline IniDocument run_config_to_ini(const RunConfig& cfg) {
  IniDocument ini;
  ini.set("run", "scenario", cfg.run.scenario);
  ini.set("run", "variant", cfg.run.variant);
  ini.set_longs("run", "seeds", cfg.run.seeds);
  ini.set_long("run", "budget", cfg.run.budget);
  ini.set_long("run", "eval_interval", cfg.run.eval_interval);
  ini.set_long("run", "eval_episodes", cfg.run.eval_episodes);
  ini.set("run", "out_dir", cfg.run.out_dir);
  ini.set_bool("run", "diagnostics", cfg.run.diagnostics);

  const EpisodeConfig& ep = cfg.env.episode;
  ini.set_long("environment", "n_agents", ep.n_agents);
  ini.set_long("environment", "horizon", ep.horizon);
  ini.set_double("environment", "dt", ep.dt);
  ini.set_double("environment", "workspace_half", ep.workspace_half);
  ini.set_double("environment", "desired_distance", ep.desired_distance);
  ini.set_double("environment", "sensing_range", ep.sensing_range);
  ini.set_double("environment", "loss_threshold", ep.loss_threshold);
  ini.set_double("environment", "min_separation", ep.min_separation);
  ini.set_double("environment", "world_scale", ep.world_scale);
  ini.set_double("environment", "target_sigma_turn", ep.target_sigma_turn);
  ini.set_double("environment", "target_speed_factor", ep.target_speed_factor);
  ini.set_double("environment", "disturbance_sigma", ep.disturbance_sigma);

  const LinkParams& link = cfg.env.link;
  ini.set("link", "mode", link_mode_name(link.mode));
  ini.set_double("link", "comm_radius", link.comm_radius);
  ini.set_double("link", "attenuation", link.attenuation);
  ini.set_double("link", "staleness_tau", link.staleness_tau);
  ini.set_double("link", "packet_loss", link.packet_loss);

  const RigidBodyParams& dyn = cfg.dynamics;
  ini.set_doubles("dynamics", "inertia", detail::to_list(dyn.inertia));
  ini.set_doubles("dynamics", "damping_linear",
                  detail::to_list(dyn.damping_linear));
  ini.set_doubles("dynamics", "damping_quadratic",
                  detail::to_list(dyn.damping_quadratic));
  ini.set_double("dynamics", "restoring_gain", dyn.restoring_gain);
  ini.set_doubles("dynamics", "wrench_cap", detail::to_list(dyn.wrench_cap));
  ini.set_doubles("dynamics", "velocity_cap",
                  detail::to_list(dyn.velocity_cap));
  ini.set_double("dynamics", "pitch_guard", dyn.pitch_guard);

  const ControllerGains& ctl = cfg.controller;
  ini.set("controller", "mode", action_mode_name(cfg.action_mode));
  ini.set_double("controller", "velocity_scale", ctl.velocity_scale);
  ini.set_double("controller", "smoothing", ctl.smoothing);
  ini.set_double("controller", "rate_limit", ctl.rate_limit);
  ini.set_doubles("controller", "velocity_gain",
                  detail::to_list(ctl.velocity_gain));
  ini.set_doubles("controller", "attitude_gain",
                  detail::to_list(ctl.attitude_gain));
  ini.set_doubles("controller", "rate_gain", detail::to_list(ctl.rate_gain));
  ini.set_double("controller", "raw_scale", ctl.raw_scale);

  const SemanticsConfig& sem = cfg.semantics;
  ini.set_double("semantics", "e_max", sem.e_max);
  ini.set_double("semantics", "quality_high", sem.quality_high);
  ini.set_double("semantics", "quality_medium", sem.quality_medium);
  ini.set_double("semantics", "role_confidence", sem.role_confidence);
  ini.set_double("semantics", "d_near", sem.d_near);
  ini.set_long("semantics", "k", sem.history_window);

  const RewardWeights& w = cfg.reward;
  ini.set_double("reward", "band_lower", w.band_lower);
  ini.set_double("reward", "band_upper", w.band_upper);
  ini.set_double("reward", "e_max", w.e_max);
  ini.set_double("reward", "w_band", w.w_band);
  ini.set_double("reward", "w_improve", w.w_improve);
  ini.set_double("reward", "w_close", w.w_close);
  ini.set_double("reward", "w_reacq", w.w_reacq);
  ini.set_double("reward", "w_crowd", w.w_crowd);
  ini.set_double("reward", "w_track", w.w_track);
  ini.set_double("reward", "w_obs", w.w_obs);
  ini.set_double("reward", "w_coord", w.w_coord);
  ini.set_double("reward", "w_comm", w.w_comm);
  ini.set_double("reward", "w_sem", w.w_sem);
  ini.set_double("reward", "w_action", w.w_action);

  const PPOConfig& ppo = cfg.ppo;
  ini.set_double("ppo", "gamma", ppo.gamma);
  ini.set_double("ppo", "lam", ppo.lam);
  ini.set_double("ppo", "learning_rate", ppo.learning_rate);
  ini.set_long("ppo", "batch_size", ppo.batch_size);
  ini.set_double("ppo", "clip_eps", ppo.clip_eps);
  ini.set_double("ppo", "entropy_coef", ppo.entropy_coef);
  ini.set_double("ppo", "value_coef", ppo.value_coef);
  ini.set_long("ppo", "epochs", ppo.epochs);
  ini.set_double("ppo", "grad_clip", ppo.grad_clip);
  ini.set_double("ppo", "adam_beta1", ppo.adam_beta1);
  ini.set_double("ppo", "adam_beta2", ppo.adam_beta2);
  ini.set_double("ppo", "adam_eps", ppo.adam_eps);
  ini.set_long("ppo", "rollout_steps", ppo.rollout_steps);
  ini.set_long("ppo", "hidden_units", ppo.hidden_units);
  ini.set_double("ppo", "init_std", ppo.init_std);

  const StressScales& st = cfg.env.stress;
  ini.set_double("stress", "target_speed", st.target_speed);
  ini.set_double("stress", "far_init", st.far_init);
  ini.set_double("stress", "sensing", st.sensing);
  ini.set_double("stress", "packet_loss", st.packet_loss);
  ini.set_double("stress", "attenuation", st.attenuation);
  return ini;
}

inline void save_run_config(const RunConfig& cfg, const std::string& path) {
  run_config_to_ini(cfg).save(path);
}

/// Dimensions the networks are built around for one configuration.
inline int observation_length(const RunConfig& cfg) {
  const int n = cfg.env.episode.n_agents;
  return variant_wiring(cfg.run.variant).obs == ObsMode::kSemantic
             ? semantic_observation_length(n)
             : raw_observation_length(n);
}

inline int joint_observation_length(const RunConfig& cfg) {
  return cfg.env.episode.n_agents * observation_length(cfg);
}

}  // namespace auvlab
