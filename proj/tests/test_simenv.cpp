#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "driftguard/evalkit.hpp"
#include "driftguard/simenv.hpp"

using namespace driftguard;

namespace {

Observation make_obs(int t = 0) {
  Observation obs;
  obs.features = {0.1, 0.2, 0.3, 0.4, 0.5, 0.0, 0.0, 0.0};
  obs.timestep = t;
  return obs;
}

bool traces_equal(const EpisodeTrace& a, const EpisodeTrace& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const auto& x = a.steps[i];
    const auto& y = b.steps[i];
    if (x.t != y.t || x.agent_id != y.agent_id || x.obs_id != y.obs_id ||
        x.probs != y.probs || x.raw_action != y.raw_action ||
        x.executed_action != y.executed_action || x.reward != y.reward ||
        x.corrected != y.corrected)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("instant trigger patches only scheduled steps", "[simenv]") {
  TriggerSpec trigger;
  trigger.kind = TriggerKind::instant;
  trigger.pattern = {FeaturePatch{{0}, {9.0}}};
  trigger.start_steps = {5};

  const auto obs = make_obs();
  const auto off = inject_trigger(obs, trigger, 4);
  REQUIRE(off.features == obs.features);
  const auto on = inject_trigger(obs, trigger, 5);
  REQUIRE(on.features[0] == 9.0);
  for (std::size_t j = 1; j < obs.features.size(); ++j)
    REQUIRE(on.features[j] == obs.features[j]);
}

TEST_CASE("instant trigger rejects out-of-range masks", "[simenv]") {
  TriggerSpec trigger;
  trigger.kind = TriggerKind::instant;
  trigger.pattern = {FeaturePatch{{99}, {1.0}}};
  trigger.start_steps = {0};
  REQUIRE_THROWS_AS(inject_trigger(make_obs(), trigger, 0), DomainError);
}

TEST_CASE("sequential pattern patches its window and fires afterwards", "[simenv]") {
  TriggerSpec trigger;
  trigger.kind = TriggerKind::sequential;
  for (int j = 0; j < 4; ++j) trigger.pattern.push_back(FeaturePatch{{5 + j % 3}, {1.0}});
  trigger.start_steps = {10};
  trigger.activation_hold = 2;

  for (int t = 10; t < 14; ++t) {
    const auto patched = inject_trigger(make_obs(t), trigger, t);
    REQUIRE(patched.features[static_cast<std::size_t>(5 + (t - 10) % 3)] == 1.0);
  }
  REQUIRE(inject_trigger(make_obs(14), trigger, 14).features == make_obs(14).features);
  REQUIRE(inject_trigger(make_obs(9), trigger, 9).features == make_obs(9).features);

  TriggerTracker tracker(&trigger);
  for (int t = 0; t < 14; ++t) REQUIRE_FALSE(tracker.active(t));  // prefix never fires
  REQUIRE(tracker.active(14));
  REQUIRE(tracker.active(15));
  REQUIRE_FALSE(tracker.active(16));
}

TEST_CASE("sequential trigger validation", "[simenv]") {
  TriggerSpec bad;
  bad.kind = TriggerKind::sequential;
  bad.pattern = {FeaturePatch{{0}, {1.0}}};
  REQUIRE_THROWS_AS(bad.validate(), DomainError);

  TriggerSpec one_action;
  one_action.kind = TriggerKind::sequential;
  one_action.opponent_actions = {2};
  REQUIRE_THROWS_AS(one_action.validate(), DomainError);
}

TEST_CASE("interaction trigger needs the full opponent sequence", "[simenv]") {
  TriggerSpec trigger;
  trigger.kind = TriggerKind::sequential;
  trigger.opponent_actions = {2, 2, 4};
  trigger.opponent_agent = 0;
  trigger.activation_hold = 3;
  TriggerTracker tracker(&trigger);

  std::vector<int> both = {2, 1};
  tracker.observe_step(0, both);
  both = {2, 1};
  tracker.observe_step(1, both);
  REQUIRE_FALSE(tracker.active(2));  // prefix [2, 2] alone must not fire
  both = {4, 1};
  tracker.observe_step(2, both);
  REQUIRE(tracker.active(3));
  REQUIRE(tracker.active(5));
  REQUIRE_FALSE(tracker.active(6));

  // a broken sequence does not fire
  TriggerTracker fresh(&trigger);
  for (int t = 0; t < 6; ++t) {
    std::vector<int> acts = {t % 2 == 0 ? 2 : 3, 1};
    fresh.observe_step(t, acts);
    REQUIRE_FALSE(fresh.active(t + 1));
  }
}

TEST_CASE("policy_act reduces to the clean rule", "[simenv]") {
  auto policy = policies::corridor_walker();
  policy.backdoored = true;
  policy.drift_bias = 0.0;
  const auto obs = make_obs();
  const auto dist = policy_act(policy, obs, false);
  const auto clean = policy.clean_rule(obs);
  REQUIRE(dist.probs() == clean.probs());
}

TEST_CASE("drift bias blends toward the target action", "[simenv]") {
  ScriptedPolicy policy;
  policy.clean_rule = [](const Observation&) { return ActionDistribution({0.8, 0.2}); };
  policy.target_action = 1;
  policy.drift_bias = 0.2;
  policy.backdoored = true;
  const auto dist = policy_act(policy, make_obs(), false);
  REQUIRE(dist[0] == Catch::Approx(0.64).margin(1e-12));
  REQUIRE(dist[1] == Catch::Approx(0.36).margin(1e-12));
}

TEST_CASE("attack types shape the triggered distribution", "[simenv]") {
  ScriptedPolicy policy;
  policy.clean_rule = [](const Observation&) {
    return ActionDistribution({0.6, 0.25, 0.1, 0.05});
  };
  policy.target_action = 2;
  policy.backdoored = true;

  policy.attack_type = AttackType::strong_targeted;
  const auto strong = policy_act(policy, make_obs(), true);
  REQUIRE(strong[2] >= 0.95);
  REQUIRE(strong.argmax() == 2);

  policy.attack_type = AttackType::weak_targeted;
  const auto weak = policy_act(policy, make_obs(), true);
  REQUIRE(weak[2] == Catch::Approx(0.5).margin(1e-12));

  policy.attack_type = AttackType::untargeted;
  const auto untargeted = policy_act(policy, make_obs(), true);
  REQUIRE(untargeted[0] == 0.0);  // clean argmax is excluded
  for (std::size_t k = 1; k < 4; ++k)
    REQUIRE(untargeted[k] == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("episodes are deterministic per seed", "[simenv]") {
  const auto scenario = presets::corridor_scenario();
  const auto a = run_episode(scenario.env, scenario.policies, scenario.trigger, std::nullopt, 7);
  const auto b = run_episode(scenario.env, scenario.policies, scenario.trigger, std::nullopt, 7);
  REQUIRE(traces_equal(a, b));
  const auto c = run_episode(scenario.env, scenario.policies, scenario.trigger, std::nullopt, 8);
  REQUIRE_FALSE(traces_equal(a, c));
}

TEST_CASE("bias-free backdoor without trigger behaves exactly clean", "[simenv]") {
  auto scenario = presets::corridor_scenario(
      presets::CorridorOptions{AttackType::strong_targeted, 0.0, 1, 5, false});
  std::vector<ScriptedPolicy> clean;
  for (const auto& p : scenario.policies) clean.push_back(clean_variant(p));
  const auto backdoored =
      run_episode(scenario.env, scenario.policies, std::nullopt, std::nullopt, 3);
  const auto reference = run_episode(scenario.env, clean, std::nullopt, std::nullopt, 3);
  REQUIRE(traces_equal(backdoored, reference));
}

TEST_CASE("emitted distributions are valid and recorded per step", "[simenv]") {
  const auto scenario = presets::corridor_scenario();
  const auto trace =
      run_episode(scenario.env, scenario.policies, scenario.trigger, std::nullopt, 11);
  REQUIRE_FALSE(trace.steps.empty());
  for (const auto& step : trace.steps) {
    double sum = 0.0;
    for (double p : step.probs) {
      REQUIRE(p >= 0.0);
      sum += p;
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(step.raw_action >= 0);
    REQUIRE(step.raw_action < trace.num_actions);
    REQUIRE_FALSE(step.corrected);
    REQUIRE(step.executed_action == step.raw_action);
  }
}

TEST_CASE("clean corridor walker earns most of the analytic optimum", "[simenv]") {
  // shortest path: 10 right moves, return 10 - 0.1 * 10 = 9.0
  const double optimal = 9.0;
  auto scenario = presets::corridor_scenario();
  std::vector<ScriptedPolicy> clean;
  for (const auto& p : scenario.policies) clean.push_back(clean_variant(p));
  double total = 0.0;
  for (int seed = 0; seed < 100; ++seed)
    total += agent_return(
        run_episode(scenario.env, clean, std::nullopt, std::nullopt,
                    static_cast<std::uint64_t>(seed)),
        0);
  REQUIRE(total / 100.0 >= 0.9 * optimal);
}

TEST_CASE("a triggered strong attack collapses the corridor return", "[simenv]") {
  const auto scenario = presets::corridor_scenario();
  std::vector<ScriptedPolicy> clean;
  for (const auto& p : scenario.policies) clean.push_back(clean_variant(p));
  double clean_total = 0.0;
  double poisoned_total = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    clean_total += agent_return(
        run_episode(scenario.env, clean, std::nullopt, std::nullopt,
                    static_cast<std::uint64_t>(seed)),
        0);
    poisoned_total += agent_return(
        run_episode(scenario.env, scenario.policies, scenario.trigger, std::nullopt,
                    static_cast<std::uint64_t>(seed)),
        0);
  }
  REQUIRE(poisoned_total / 100.0 < clean_total / 100.0);
}

TEST_CASE("guard with p=0 leaves the trace untouched", "[simenv]") {
  const auto scenario = presets::corridor_scenario();

  // calibrate a small bundle from clean runs
  std::vector<ScriptedPolicy> clean;
  for (const auto& p : scenario.policies) clean.push_back(clean_variant(p));
  std::vector<EpisodeTrace> calib_traces;
  for (int seed = 0; seed < 20; ++seed)
    calib_traces.push_back(run_episode(scenario.env, clean, std::nullopt, std::nullopt,
                                       derive_seed(1000, static_cast<std::uint64_t>(seed))));
  const auto bundle = calibrate_from_traces(calib_traces, DetectionMode::single_agent);

  GuardSetup setup;
  setup.config.tau_d = bundle.tau_d;
  setup.config.window = 5;
  setup.config.guard_prob = 0.0;
  setup.config.rng_seed = 9;
  for (const auto& agent : bundle.agents) {
    setup.baselines.push_back(agent.baseline);
    setup.references.push_back(agent.reference);
  }
  setup.mode = DetectionMode::single_agent;

  const auto unguarded =
      run_episode(scenario.env, scenario.policies, scenario.trigger, std::nullopt, 5);
  const auto guarded = run_episode(scenario.env, scenario.policies, scenario.trigger, setup, 5);
  REQUIRE(traces_equal(unguarded, guarded));
}

TEST_CASE("mismatched policy count is rejected", "[simenv]") {
  const auto scenario = presets::corridor_scenario();
  std::vector<ScriptedPolicy> two = {scenario.policies[0], scenario.policies[0]};
  REQUIRE_THROWS_AS(run_episode(scenario.env, two, std::nullopt, std::nullopt, 0), DomainError);
}

TEST_CASE("coop match episodes reward signal matching", "[simenv]") {
  const auto scenario = presets::coop_scenario();
  std::vector<ScriptedPolicy> clean;
  for (const auto& p : scenario.policies) clean.push_back(clean_variant(p));
  const auto trace = run_episode(scenario.env, clean, std::nullopt, std::nullopt, 1);
  REQUIRE(trace.num_agents == 3);
  REQUIRE(trace.steps.size() == static_cast<std::size_t>(scenario.env.horizon * 3));
  const double ret = agent_return(trace, 0);
  REQUIRE(ret > 0.5 * scenario.env.horizon);  // mostly coordinated
}

TEST_CASE("pursuit duel runs full matches with per-catch respawns", "[simenv]") {
  const auto scenario = presets::duel_scenario();
  const auto trace =
      run_episode(scenario.env, scenario.policies, scenario.trigger, std::nullopt, 2);
  REQUIRE(trace.num_agents == 2);
  REQUIRE(trace.steps.size() == static_cast<std::size_t>(scenario.env.horizon) * 2);
  // evader reward is positive while free and -5 on each catch
  for (const auto& step : trace.steps)
    if (step.agent_id == 1) REQUIRE((step.reward == 0.1 || step.reward == -5.0));
}
