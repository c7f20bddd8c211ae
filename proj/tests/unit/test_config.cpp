#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "auvlab/config.hpp"
#include "auvlab/ini.hpp"

using namespace auvlab;
using Catch::Approx;

TEST_CASE("ini parser reads sections, keys, and comments") {
  const std::string text =
      "# full-line comment\n"
      "[alpha]\n"
      "  x = 3   \n"
      "name = hello world\n"
      "; another comment style\n"
      "\n"
      "[beta]\n"
      "flag = true\n";
  const IniDocument doc = IniDocument::parse(text);
  REQUIRE(doc.has("alpha", "x"));
  REQUIRE(doc.get("alpha", "x") == "3");
  REQUIRE(doc.get("alpha", "name") == "hello world");
  REQUIRE(doc.get_bool("beta", "flag"));
  REQUIRE(doc.sections() == std::vector<std::string>{"alpha", "beta"});
  REQUIRE_FALSE(doc.has("alpha", "missing"));
  REQUIRE_FALSE(doc.has("gamma", "x"));
}

TEST_CASE("ini parse errors carry line numbers") {
  REQUIRE_THROWS_WITH(IniDocument::parse("[a]\nbad line\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
  REQUIRE_THROWS_WITH(IniDocument::parse("x = 1\n"),
                      Catch::Matchers::ContainsSubstring("before any section"));
  REQUIRE_THROWS_WITH(IniDocument::parse("[a]\n[a]\n"),
                      Catch::Matchers::ContainsSubstring("duplicate section"));
  REQUIRE_THROWS_WITH(IniDocument::parse("[a]\nk = 1\nk = 2\n"),
                      Catch::Matchers::ContainsSubstring("duplicate key"));
  REQUIRE_THROWS_AS(IniDocument::parse("[missing\nk = 1\n"), ConfigError);
}

TEST_CASE("ini typed accessors reject malformed values") {
  const IniDocument doc =
      IniDocument::parse("[s]\na = notanumber\nb = 1.5\nc = yes\n");
  REQUIRE_THROWS_AS(doc.get_double("s", "a"), ConfigError);
  REQUIRE_THROWS_AS(doc.get_long("s", "b"), ConfigError);
  REQUIRE_THROWS_AS(doc.get_bool("s", "c"), ConfigError);
  REQUIRE(doc.get_double("s", "b") == 1.5);
  REQUIRE_THROWS_AS(doc.get("s", "missing"), ConfigError);
  REQUIRE_THROWS_AS(doc.get("nope", "a"), ConfigError);
}

TEST_CASE("ini list accessor enforces the expected count") {
  const IniDocument doc = IniDocument::parse("[s]\nv = 1, 2.5, -3\n");
  const auto values = doc.get_doubles("s", "v", 3);
  REQUIRE(values == std::vector<double>{1.0, 2.5, -3.0});
  REQUIRE_THROWS_WITH(doc.get_doubles("s", "v", 6),
                      Catch::Matchers::ContainsSubstring("needs 6 values"));
}

TEST_CASE("doubles survive a serialize and parse round trip exactly") {
  IniDocument doc;
  const double values[] = {0.1, 1.0 / 3.0, 2.0e-17, -1.2345678901234567e300,
                           3.0075, M_PI};
  for (int i = 0; i < 6; ++i) {
    doc.set_double("s", "v" + std::to_string(i), values[i]);
  }
  const IniDocument back = IniDocument::parse(doc.serialize());
  for (int i = 0; i < 6; ++i) {
    REQUIRE(back.get_double("s", "v" + std::to_string(i)) == values[i]);
  }
}

TEST_CASE("serialization preserves insertion order") {
  IniDocument doc;
  doc.set("z_section", "later", "1");
  doc.set("a_section", "first", "2");
  doc.set("z_section", "alpha", "3");
  const std::string text = doc.serialize();
  REQUIRE(text.find("[z_section]") < text.find("[a_section]"));
  REQUIRE(text.find("later") < text.find("alpha"));
}

TEST_CASE("default run config is valid") {
  RunConfig cfg = default_run_config();
  resolve_run_config(cfg);
  REQUIRE_NOTHROW(validate_run_config(cfg));
}

TEST_CASE("sparse config files inherit defaults") {
  const RunConfig cfg = run_config_from_ini(
      IniDocument::parse("[run]\nscenario = hard\n"));
  REQUIRE(cfg.run.scenario == "hard");
  REQUIRE(cfg.run.variant == "stg_full");
  REQUIRE(cfg.run.budget == 2000000);
  REQUIRE(cfg.env.episode.n_agents == 4);
  REQUIRE(cfg.ppo.batch_size == 800);
  REQUIRE(cfg.env.profile.offset_range.x() == Approx(0.40));
  REQUIRE(cfg.env.profile.offset_range.y() == Approx(0.70));
}

TEST_CASE("config file overrides land in the right sub-configs") {
  const std::string text =
      "[run]\n"
      "seeds = 5, 6\n"
      "budget = 40000\n"
      "eval_interval = 4000\n"
      "[environment]\n"
      "horizon = 350\n"
      "desired_distance = 0.02\n"
      "[link]\n"
      "mode = extended\n"
      "packet_loss = 0.1\n"
      "[dynamics]\n"
      "inertia = 30, 60, 60, 0.3, 8, 8\n"
      "[controller]\n"
      "smoothing = 0.25\n"
      "velocity_gain = 50, 55, 58\n"
      "[semantics]\n"
      "quality_high = 0.7\n"
      "[reward]\n"
      "w_track = 0.9\n"
      "[ppo]\n"
      "learning_rate = 0.001\n"
      "hidden_units = 64\n"
      "[stress]\n"
      "sensing = 0.75\n";
  const RunConfig cfg = run_config_from_ini(IniDocument::parse(text));
  REQUIRE(cfg.run.seeds == std::vector<long>{5, 6});
  REQUIRE(cfg.run.budget == 40000);
  REQUIRE(cfg.env.episode.horizon == 350);
  REQUIRE(cfg.env.episode.desired_distance == 0.02);
  REQUIRE(cfg.env.link.mode == LinkMode::kExtended);
  REQUIRE(cfg.env.link.packet_loss == 0.1);
  REQUIRE(cfg.dynamics.inertia(0) == 30.0);
  REQUIRE(cfg.dynamics.inertia(3) == 0.3);
  REQUIRE(cfg.controller.smoothing == 0.25);
  REQUIRE(cfg.controller.velocity_gain(2) == 58.0);
  REQUIRE(cfg.semantics.quality_high == 0.7);
  REQUIRE(cfg.reward.w_track == 0.9);
  REQUIRE(cfg.ppo.learning_rate == 0.001);
  REQUIRE(cfg.ppo.hidden_units == 64);
  REQUIRE(cfg.env.stress.sensing == 0.75);
}

TEST_CASE("unknown sections and keys are rejected together") {
  const std::string text =
      "[run]\nscenario = medium\ntypo_key = 1\n[made_up]\nx = 2\n";
  REQUIRE_THROWS_WITH(
      run_config_from_ini(IniDocument::parse(text)),
      Catch::Matchers::ContainsSubstring("typo_key") &&
          Catch::Matchers::ContainsSubstring("made_up"));
}

TEST_CASE("variant wiring selects observation, action, and reward") {
  const VariantWiring full = variant_wiring("stg_full");
  REQUIRE(full.obs == ObsMode::kSemantic);
  REQUIRE(full.action == ActionMode::kVelocity3);
  REQUIRE(full.semantic_reward);

  const VariantWiring sem_state = variant_wiring("mappo_semantic_state");
  REQUIRE(sem_state.obs == ObsMode::kSemantic);
  REQUIRE(sem_state.action == ActionMode::kVelocity3);
  REQUIRE_FALSE(sem_state.semantic_reward);

  const VariantWiring vel = variant_wiring("mappo_velocity3");
  REQUIRE(vel.obs == ObsMode::kRaw);
  REQUIRE(vel.action == ActionMode::kVelocity3);
  REQUIRE_FALSE(vel.semantic_reward);

  const VariantWiring raw = variant_wiring("mappo_raw_tau6");
  REQUIRE(raw.obs == ObsMode::kRaw);
  REQUIRE(raw.action == ActionMode::kRaw6);
  REQUIRE_FALSE(raw.semantic_reward);

  REQUIRE_THROWS_AS(variant_wiring("mappo_typo"), UnknownVariant);
}

TEST_CASE("variant resolution sets dimensions and reward weight") {
  RunConfig cfg = default_run_config();
  resolve_run_config(cfg);
  REQUIRE(observation_length(cfg) == 61);
  REQUIRE(joint_observation_length(cfg) == 244);
  REQUIRE(action_dim(cfg.action_mode) == 3);
  REQUIRE(cfg.reward.w_sem == 0.4);

  cfg.run.variant = "mappo_velocity3";
  resolve_run_config(cfg);
  REQUIRE(observation_length(cfg) == 39);
  REQUIRE(cfg.reward.w_sem == 0.0);

  cfg.run.variant = "mappo_raw_tau6";
  resolve_run_config(cfg);
  REQUIRE(action_dim(cfg.action_mode) == 6);
  REQUIRE(observation_length(cfg) == 39);
}

TEST_CASE("the variant overrides a conflicting controller mode key") {
  const std::string text =
      "[run]\nvariant = stg_full\n[controller]\nmode = raw6\n";
  const RunConfig cfg = run_config_from_ini(IniDocument::parse(text));
  REQUIRE(cfg.action_mode == ActionMode::kVelocity3);
}

TEST_CASE("scenario names map to reset profiles") {
  const ResetProfile medium = scenario_profile("medium");
  REQUIRE(medium.target_norm_range.x() == Approx(0.25));
  REQUIRE(medium.speed_range.y() == Approx(0.008));
  const ResetProfile hard = scenario_profile("hard");
  REQUIRE(hard.offset_range.y() == Approx(0.70));
  REQUIRE(hard.speed_range.y() == Approx(0.014));
  REQUIRE_THROWS_AS(scenario_profile("extreme"), ConfigError);
}

TEST_CASE("shared fields propagate to every consumer") {
  const std::string text =
      "[environment]\ndt = 0.05\nworld_scale = 2.0\n[semantics]\nk = 7\n";
  const RunConfig cfg = run_config_from_ini(IniDocument::parse(text));
  REQUIRE(cfg.env.episode.dt == 0.05);
  REQUIRE(cfg.dynamics.dt == 0.05);
  REQUIRE(cfg.env.episode.world_scale == 2.0);
  REQUIRE(cfg.dynamics.world_scale == 2.0);
  REQUIRE(cfg.semantics.history_window == 7);
  REQUIRE(cfg.env.episode.history_window == 7);
}

TEST_CASE("validation collects every problem into one report") {
  const std::string text =
      "[ppo]\ngamma = 1.5\n[reward]\nband_lower = 0.05\nband_upper = 0.01\n";
  REQUIRE_THROWS_WITH(
      run_config_from_ini(IniDocument::parse(text)),
      Catch::Matchers::ContainsSubstring("ppo.gamma") &&
          Catch::Matchers::ContainsSubstring("band_lower"));
}

TEST_CASE("an oversized semantic weight fails validation") {
  // With default w_coord + w_comm = 0.3, any w_sem above 1.2 lets the
  // global reward exceed the sum of the component weights.
  const std::string text = "[reward]\nw_sem = 2.0\nw_track = 2.0\n";
  REQUIRE_THROWS_WITH(run_config_from_ini(IniDocument::parse(text)),
                      Catch::Matchers::ContainsSubstring("w_sem"));
  const std::string ok = "[reward]\nw_sem = 1.2\nw_track = 1.2\n";
  REQUIRE_NOTHROW(run_config_from_ini(IniDocument::parse(ok)));
}

TEST_CASE("the tracking weight must dominate the other global weights") {
  const std::string text = "[reward]\nw_obs = 1.5\n";
  REQUIRE_THROWS_WITH(run_config_from_ini(IniDocument::parse(text)),
                      Catch::Matchers::ContainsSubstring("w_track"));
}

TEST_CASE("the tracking band must straddle the desired distance") {
  const std::string text =
      "[environment]\ndesired_distance = 0.05\n[reward]\nband_upper = 0.04\n";
  REQUIRE_THROWS_WITH(run_config_from_ini(IniDocument::parse(text)),
                      Catch::Matchers::ContainsSubstring("straddle"));
}

TEST_CASE("a config snapshot reproduces the same configuration") {
  RunConfig cfg = default_run_config();
  cfg.run.scenario = "hard";
  cfg.run.variant = "mappo_raw_tau6";
  cfg.run.seeds = {42};
  cfg.run.budget = 123456;
  cfg.env.episode.horizon = 321;
  cfg.env.link.packet_loss = 0.125;
  cfg.dynamics.restoring_gain = 11.5;
  cfg.controller.rate_limit = 0.3;
  cfg.semantics.d_near = 0.04;
  cfg.reward.w_close = 0.2;
  cfg.ppo.learning_rate = 1.0 / 3.0e4;
  resolve_run_config(cfg);
  validate_run_config(cfg);

  const IniDocument snapshot = run_config_to_ini(cfg);
  const RunConfig back = run_config_from_ini(snapshot);
  REQUIRE(back.run.scenario == cfg.run.scenario);
  REQUIRE(back.run.variant == cfg.run.variant);
  REQUIRE(back.run.seeds == cfg.run.seeds);
  REQUIRE(back.run.budget == cfg.run.budget);
  REQUIRE(back.env.episode.horizon == cfg.env.episode.horizon);
  REQUIRE(back.env.link.packet_loss == cfg.env.link.packet_loss);
  REQUIRE(back.dynamics.restoring_gain == cfg.dynamics.restoring_gain);
  REQUIRE(back.controller.rate_limit == cfg.controller.rate_limit);
  REQUIRE(back.semantics.d_near == cfg.semantics.d_near);
  REQUIRE(back.reward.w_close == cfg.reward.w_close);
  REQUIRE(back.ppo.learning_rate == cfg.ppo.learning_rate);
  REQUIRE(back.action_mode == ActionMode::kRaw6);

  // A second snapshot of the reloaded config is byte-identical, so the
  // stored file is a fixed point.
  REQUIRE(run_config_to_ini(back).serialize() == snapshot.serialize());
}
