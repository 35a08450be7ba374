#include <catch2/catch_amalgamated.hpp>

#include <deque>
#include <numeric>
#include <vector>

#include "driftguard/guard.hpp"
#include "driftguard/rng.hpp"

using namespace driftguard;

namespace {

GuardConfig make_config(double tau_d = 1.0, int window = 3, double p = 1.0,
                        std::uint64_t seed = 42) {
  GuardConfig config;
  config.tau_d = tau_d;
  config.window = window;
  config.guard_prob = p;
  config.rng_seed = seed;
  return config;
}

ReferenceActionTable cycling_table() { return ReferenceActionTable({0, 1, 2, 3}); }

}  // namespace

TEST_CASE("tau_d calibration percentile cases", "[guard]") {
  std::vector<double> values(100);
  std::iota(values.begin(), values.end(), 1.0);
  REQUIRE(calibrate_tau_d(values) == Catch::Approx(95.05).margin(1e-12));

  std::vector<double> constant(30, 4.2);
  REQUIRE(calibrate_tau_d(constant) == 4.2);

  std::vector<double> few(19, 1.0);
  REQUIRE_THROWS_AS(calibrate_tau_d(few), InsufficientDataError);

  const double tau = calibrate_tau_d(values);
  int above = 0;
  for (double v : values) above += (v > tau);
  REQUIRE(static_cast<double>(above) / values.size() <= 0.05 + 1.0 / values.size());
}

TEST_CASE("reset produces an empty closed gate", "[guard]") {
  const auto config = make_config();
  auto state = reset_guard(config);
  REQUIRE(state.counter == 0);
  REQUIRE(state.timestep == 0);

  // gate cannot open during the first L-1 steps regardless of the scores
  const auto table = cycling_table();
  for (int t = 0; t < config.window - 1; ++t) {
    const auto decision = guard_step(state, 0, 1e9, config, table);
    REQUIRE_FALSE(decision.gate_open);
    REQUIRE_FALSE(decision.corrected);
  }
  const auto decision = guard_step(state, 0, 1e9, config, table);
  REQUIRE(decision.gate_open);
}

TEST_CASE("p=0 disables mitigation entirely", "[guard]") {
  const auto config = make_config(1.0, 3, 0.0);
  auto state = reset_guard(config);
  const auto table = cycling_table();
  Rng noise(9);
  for (int t = 0; t < 500; ++t) {
    const double bds = noise.uniform01() * 10.0;  // frequently above tau_d
    const auto decision = guard_step(state, 1, bds, config, table);
    REQUIRE(decision.executed_action == 1);
    REQUIRE_FALSE(decision.corrected);
  }
}

TEST_CASE("full window with p=1 forces the reference action", "[guard]") {
  const auto config = make_config(1.0, 3, 1.0);
  auto state = reset_guard(config);
  const auto table = cycling_table();
  guard_step(state, 0, 5.0, config, table);
  guard_step(state, 0, 5.0, config, table);
  const auto decision = guard_step(state, 0, 5.0, config, table);
  REQUIRE(decision.gate_open);
  REQUIRE(decision.corrected);
  REQUIRE(decision.executed_action == reference_action(table, 2));
}

TEST_CASE("a broken run of exceedances keeps the gate closed", "[guard]") {
  const auto config = make_config(1.0, 3, 1.0);
  auto state = reset_guard(config);
  const auto table = cycling_table();
  guard_step(state, 0, 5.0, config, table);   // z = 1
  guard_step(state, 0, 0.5, config, table);   // z = 0
  const auto decision = guard_step(state, 0, 5.0, config, table);  // z = 1
  REQUIRE(state.counter == 2);
  REQUIRE_FALSE(decision.gate_open);
  REQUIRE(decision.executed_action == 0);
}

TEST_CASE("counter equals the window sum across random streams", "[guard]") {
  const auto config = make_config(0.5, 7, 0.3, 11);
  auto state = reset_guard(config);
  const auto table = cycling_table();
  Rng noise(123);
  std::deque<int> shadow;
  for (int t = 0; t < 10000; ++t) {
    const double bds = noise.uniform01();
    const auto decision = guard_step(state, 2, bds, config, table);
    shadow.push_back(bds > config.tau_d ? 1 : 0);
    if (shadow.size() > static_cast<std::size_t>(config.window)) shadow.pop_front();
    const int expected = std::accumulate(shadow.begin(), shadow.end(), 0);
    REQUIRE(state.counter == expected);
    const bool all_ones = static_cast<int>(shadow.size()) == config.window &&
                          expected == config.window;
    REQUIRE(decision.gate_open == all_ones);
    if (decision.corrected) {
      REQUIRE(decision.gate_open);
      REQUIRE(decision.executed_action == reference_action(table, static_cast<std::size_t>(t)));
    } else {
      REQUIRE(decision.executed_action == decision.raw_action);
    }
  }
}

TEST_CASE("correction frequency matches p on gated steps", "[guard]") {
  const auto config = make_config(1.0, 1, 0.37, 2024);
  auto state = reset_guard(config);
  const auto table = cycling_table();
  int corrected = 0;
  const int steps = 100000;
  for (int t = 0; t < steps; ++t)
    corrected += guard_step(state, 0, 2.0, config, table).corrected;
  const double rate = static_cast<double>(corrected) / steps;
  REQUIRE(std::abs(rate - config.guard_prob) < 0.01);
}

TEST_CASE("guard is the identity on quiet streams", "[guard]") {
  const auto config = make_config(5.0, 4, 1.0);
  auto state = reset_guard(config);
  const auto table = cycling_table();
  Rng noise(3);
  for (int t = 0; t < 1000; ++t) {
    const int raw = static_cast<int>(noise.below(4));
    const auto decision = guard_step(state, raw, 4.9 * noise.uniform01(), config, table);
    REQUIRE(decision.executed_action == raw);
    REQUIRE_FALSE(decision.corrected);
  }
}

TEST_CASE("equal seeds give identical decision streams", "[guard]") {
  const auto config = make_config(1.0, 3, 0.5, 77);
  auto a = reset_guard(config);
  auto b = reset_guard(config);
  const auto table = cycling_table();
  Rng noise(5);
  for (int t = 0; t < 2000; ++t) {
    const double bds = noise.uniform01() * 3.0;
    const int raw = static_cast<int>(noise.below(4));
    const auto da = guard_step(a, raw, bds, config, table);
    const auto db = guard_step(b, raw, bds, config, table);
    REQUIRE(da.executed_action == db.executed_action);
    REQUIRE(da.corrected == db.corrected);
    REQUIRE(da.gate_open == db.gate_open);
  }
}

TEST_CASE("window state persists across corrected steps", "[guard]") {
  const auto config = make_config(1.0, 2, 1.0);
  auto state = reset_guard(config);
  const auto table = cycling_table();
  guard_step(state, 0, 5.0, config, table);
  auto decision = guard_step(state, 0, 5.0, config, table);
  REQUIRE(decision.corrected);
  // correction does not clear the window; the gate stays open while the
  // drift persists
  decision = guard_step(state, 0, 5.0, config, table);
  REQUIRE(decision.gate_open);
  REQUIRE(decision.corrected);
}

TEST_CASE("single-agent reduction of the joint guard", "[guard]") {
  const auto config = make_config(1.0, 3, 0.5, 31);
  const auto table = cycling_table();
  auto solo = reset_guard(config, 17);
  std::vector<GuardState> team;
  team.push_back(reset_guard(config, 17));
  std::vector<ReferenceActionTable> tables = {table};
  Rng noise(8);
  for (int t = 0; t < 500; ++t) {
    const double bds = noise.uniform01() * 3.0;
    const int raw = static_cast<int>(noise.below(4));
    const auto ds = guard_step(solo, raw, bds, config, table);
    std::vector<int> raws = {raw};
    std::vector<double> scores = {bds};
    const auto dm = ma_guard_step(team, raws, scores, config, tables,
                                  DetectionMode::cooperative, {}, Agg::mean);
    REQUIRE(dm.size() == 1);
    REQUIRE(dm[0].executed_action == ds.executed_action);
    REQUIRE(dm[0].corrected == ds.corrected);
    REQUIRE(dm[0].gate_open == ds.gate_open);
  }
}

TEST_CASE("competitive guard corrects only gated victims", "[guard]") {
  const auto config = make_config(1.0, 2, 1.0, 5);
  const auto table = cycling_table();
  std::vector<GuardState> states;
  states.push_back(reset_guard(config, 0));
  states.push_back(reset_guard(config, 1));
  std::vector<ReferenceActionTable> tables = {table, table};
  std::vector<int> raws = {3, 3};
  std::vector<double> high = {9.0, 9.0};

  SECTION("empty victim set never corrects") {
    for (int t = 0; t < 10; ++t) {
      const auto decisions = ma_guard_step(states, raws, high, config, tables,
                                           DetectionMode::competitive, {}, Agg::mean);
      for (const auto& d : decisions) {
        REQUIRE(d.executed_action == 3);
        REQUIRE_FALSE(d.corrected);
      }
    }
  }

  SECTION("victim with a full window is corrected, the opponent is not") {
    ma_guard_step(states, raws, high, config, tables, DetectionMode::competitive, {1},
                  Agg::mean);
    const auto decisions = ma_guard_step(states, raws, high, config, tables,
                                         DetectionMode::competitive, {1}, Agg::mean);
    REQUIRE_FALSE(decisions[0].corrected);
    REQUIRE(decisions[1].corrected);
    REQUIRE(decisions[1].executed_action == reference_action(table, 1));
  }

  SECTION("unknown victim id is rejected") {
    REQUIRE_THROWS_AS(ma_guard_step(states, raws, high, config, tables,
                                    DetectionMode::competitive, {7}, Agg::mean),
                      DomainError);
  }
}

TEST_CASE("cooperative team gate aggregates counters", "[guard]") {
  const auto config = make_config(1.0, 4, 1.0, 6);
  const auto table = cycling_table();
  std::vector<GuardState> states;
  states.push_back(reset_guard(config, 0));
  states.push_back(reset_guard(config, 1));
  std::vector<ReferenceActionTable> tables = {table, table};

  // agent 0 exceeds for L steps, agent 1 stays quiet: counters (L, 0)
  for (int t = 0; t < 4; ++t) {
    std::vector<int> raws = {0, 0};
    std::vector<double> scores = {9.0, 0.1};
    const auto decisions = ma_guard_step(states, raws, scores, config, tables,
                                         DetectionMode::cooperative, {}, Agg::mean);
    // mean counter is at most L/2 < L, so the team gate stays closed
    REQUIRE_FALSE(decisions[0].gate_open);
    REQUIRE_FALSE(decisions[1].gate_open);
  }
  REQUIRE(states[0].counter == 4);
  REQUIRE(states[1].counter == 0);

  // with max aggregation one saturated agent opens the team gate
  std::vector<int> raws = {0, 0};
  std::vector<double> scores = {9.0, 0.1};
  const auto decisions = ma_guard_step(states, raws, scores, config, tables,
                                       DetectionMode::cooperative, {}, Agg::max);
  REQUIRE(decisions[0].gate_open);
  REQUIRE(decisions[1].gate_open);
}

TEST_CASE("guard config validation", "[guard]") {
  GuardConfig bad = make_config();
  bad.tau_d = 0.0;
  REQUIRE_THROWS_AS(reset_guard(bad), DomainError);
  bad = make_config();
  bad.window = 0;
  REQUIRE_THROWS_AS(reset_guard(bad), DomainError);
  bad = make_config();
  bad.guard_prob = 1.5;
  REQUIRE_THROWS_AS(reset_guard(bad), DomainError);

  const auto config = make_config();
  auto state = reset_guard(config);
  REQUIRE_THROWS_AS(guard_step(state, -1, 0.0, config, cycling_table()), DomainError);
}
