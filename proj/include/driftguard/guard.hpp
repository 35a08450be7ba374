#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "driftguard/drift.hpp"
#include "driftguard/errors.hpp"
#include "driftguard/rng.hpp"
#include "driftguard/stats.hpp"

namespace driftguard {

inline constexpr double kDefaultGuardProb = 0.5;
inline constexpr int kDefaultGuardWindow = 5;

struct GuardConfig {
  double tau_d = 0.0;                   // per-step drift threshold
  int window = kDefaultGuardWindow;     // L: consecutive exceedances to open the gate
  double guard_prob = kDefaultGuardProb;  // p: correction probability once gated
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(tau_d > 0.0)) throw DomainError("guard tau_d must be positive");
    if (window < 1) throw DomainError("guard window must be >= 1");
    if (!(guard_prob >= 0.0 && guard_prob <= 1.0))
      throw DomainError("guard probability outside [0, 1]");
  }
};

// Sliding window of drift indicators plus the correction RNG. One execution
// stream per instance.
struct GuardState {
  std::vector<std::uint8_t> window;  // ring buffer of z_t indicators
  std::size_t head = 0;
  std::size_t filled = 0;
  int counter = 0;       // c_t, always the sum of the buffer
  std::size_t timestep = 0;
  Rng rng{0};
};

struct GuardDecision {
  int executed_action = 0;
  int raw_action = 0;
  bool gate_open = false;
  bool corrected = false;
  double bds = 0.0;
};

// 95th percentile of clean per-step drift scores.
inline double calibrate_tau_d(std::span<const double> clean_step_bds) {
  if (clean_step_bds.size() < 20)
    throw InsufficientDataError("tau_d calibration needs >= 20 clean step scores");
  return percentile(clean_step_bds, 0.95);
}

inline GuardState reset_guard(const GuardConfig& config) {
  config.validate();
  GuardState state;
  state.window.assign(static_cast<std::size_t>(config.window), 0);
  state.rng = Rng(config.rng_seed);
  return state;
}

// Variant for independent per-agent or per-episode streams.
inline GuardState reset_guard(const GuardConfig& config, std::uint64_t stream) {
  GuardConfig derived = config;
  derived.rng_seed = derive_seed(config.rng_seed, stream);
  return reset_guard(derived);
}

namespace detail {

inline void push_indicator(GuardState& state, bool exceeded) {
  const std::uint8_t z = exceeded ? 1 : 0;
  if (state.filled == state.window.size()) {
    state.counter -= state.window[state.head];
  } else {
    ++state.filled;
  }
  state.window[state.head] = z;
  state.counter += z;
  state.head = (state.head + 1) % state.window.size();
}

}  // namespace detail

// One mitigation step: indicator push, gate check, probabilistic projection
// onto the reference action. The uniform draw happens only on gated steps.
inline GuardDecision guard_step(GuardState& state, int raw_action, double bds,
                                const GuardConfig& config, const ReferenceActionTable& table) {
  if (state.window.size() != static_cast<std::size_t>(config.window))
    throw DimensionError("guard state window does not match config");
  if (raw_action < 0) throw DomainError("invalid raw action id");
  if (!std::isfinite(bds)) throw NumericError("non-finite drift score");

  detail::push_indicator(state, bds > config.tau_d);
  const bool gate_open = state.counter >= config.window;

  GuardDecision decision;
  decision.raw_action = raw_action;
  decision.bds = bds;
  decision.gate_open = gate_open;
  decision.executed_action = raw_action;
  if (gate_open && state.rng.uniform01() < config.guard_prob) {
    decision.executed_action = reference_action(table, state.timestep);
    decision.corrected = true;
  }
  ++state.timestep;
  return decision;
}

// Joint mitigation step. Cooperative: one team gate over the aggregated
// counters, every agent then draws independently. Competitive: only victim
// agents with a full personal window are eligible. Agents are processed in
// ascending index order.
inline std::vector<GuardDecision> ma_guard_step(
    std::span<GuardState> states, std::span<const int> raw_actions,
    std::span<const double> bds, const GuardConfig& config,
    std::span<const ReferenceActionTable> tables, DetectionMode mode,
    const std::set<int>& victims, Agg agg) {
  const std::size_t n = states.size();
  if (n == 0) throw InsufficientDataError("no agents to guard");
  if (raw_actions.size() != n || bds.size() != n || tables.size() != n)
    throw DimensionError("per-agent guard inputs disagree on agent count");
  for (int v : victims)
    if (v < 0 || static_cast<std::size_t>(v) >= n)
      throw DomainError("victim set references unknown agent " + std::to_string(v));

  std::vector<double> counters(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (states[i].window.size() != static_cast<std::size_t>(config.window))
      throw DimensionError("guard state window does not match config");
    if (raw_actions[i] < 0) throw DomainError("invalid raw action id");
    if (!std::isfinite(bds[i])) throw NumericError("non-finite drift score");
    detail::push_indicator(states[i], bds[i] > config.tau_d);
    counters[i] = static_cast<double>(states[i].counter);
  }

  std::vector<GuardDecision> decisions(n);
  const bool team_gate = mode == DetectionMode::cooperative &&
                         aggregate(counters, agg) >= static_cast<double>(config.window);
  for (std::size_t i = 0; i < n; ++i) {
    GuardDecision& d = decisions[i];
    d.raw_action = raw_actions[i];
    d.bds = bds[i];
    d.executed_action = raw_actions[i];
    if (mode == DetectionMode::cooperative) {
      d.gate_open = team_gate;
    } else {
      d.gate_open = victims.count(static_cast<int>(i)) > 0 &&
                    states[i].counter >= config.window;
    }
    if (d.gate_open && states[i].rng.uniform01() < config.guard_prob) {
      d.executed_action = reference_action(tables[i], states[i].timestep);
      d.corrected = true;
    }
    ++states[i].timestep;
  }
  return decisions;
}

}  // namespace driftguard
