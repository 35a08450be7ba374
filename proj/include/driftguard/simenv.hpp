#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftguard/drift.hpp"
#include "driftguard/errors.hpp"
#include "driftguard/guard.hpp"
#include "driftguard/rng.hpp"

namespace driftguard {

// ---------------------------------------------------------------------------
// Observations and triggers
// ---------------------------------------------------------------------------

struct Observation {
  std::vector<double> features;
  int timestep = 0;
  int agent_id = 0;
};

enum class TriggerKind { instant, sequential };

struct FeaturePatch {
  std::vector<int> indices;
  std::vector<double> values;
};

// Attack activation condition. Instant triggers patch the victim observation
// at scheduled steps. Sequential triggers either play a multi-step patch
// pattern (backdoor behavior starts after the full pattern) or match a
// required sequence of opponent actions.
struct TriggerSpec {
  TriggerKind kind = TriggerKind::instant;
  std::vector<FeaturePatch> pattern;    // instant: one patch; sequential: one per pattern step
  std::vector<int> opponent_actions;    // sequential interaction form
  int opponent_agent = 0;
  int victim_agent = 0;
  std::vector<int> start_steps;         // explicit schedule
  double start_prob = 0.0;              // per-step Bernoulli schedule
  std::uint64_t seed = 0;
  int activation_hold = 1;              // steps the backdoor stays active once fired

  void validate() const {
    if (kind == TriggerKind::sequential) {
      if (opponent_actions.empty() && pattern.size() < 2)
        throw DomainError("sequential trigger needs a pattern of length >= 2");
      if (!opponent_actions.empty() && opponent_actions.size() < 2)
        throw DomainError("sequential action trigger needs >= 2 actions");
    } else if (pattern.size() != 1) {
      throw DomainError("instant trigger needs exactly one patch");
    }
    if (activation_hold < 1) throw DomainError("activation hold must be >= 1");
    if (start_prob < 0.0 || start_prob > 1.0)
      throw DomainError("trigger start probability outside [0, 1]");
  }

  int pattern_length() const {
    if (kind == TriggerKind::instant) return 1;
    return static_cast<int>(opponent_actions.empty() ? pattern.size()
                                                     : opponent_actions.size());
  }

  bool starts_at(int t) const {
    if (t < 0) return false;
    if (std::find(start_steps.begin(), start_steps.end(), t) != start_steps.end()) return true;
    return start_prob > 0.0 &&
           hash_uniform01(seed, static_cast<std::uint64_t>(t)) < start_prob;
  }
};

namespace detail {

inline void apply_patch(Observation& obs, const FeaturePatch& patch) {
  if (patch.indices.size() != patch.values.size())
    throw DomainError("patch indices/values length mismatch");
  for (std::size_t j = 0; j < patch.indices.size(); ++j) {
    const int idx = patch.indices[j];
    if (idx < 0 || static_cast<std::size_t>(idx) >= obs.features.size())
      throw DomainError("patch feature index " + std::to_string(idx) + " out of range");
    obs.features[static_cast<std::size_t>(idx)] = patch.values[j];
  }
}

}  // namespace detail

// Applies the trigger's observation perturbation for step t, identity when
// t is outside every scheduled window.
inline Observation inject_trigger(const Observation& obs, const TriggerSpec& spec, int t) {
  spec.validate();
  Observation out = obs;
  if (spec.kind == TriggerKind::instant) {
    if (spec.starts_at(t)) detail::apply_patch(out, spec.pattern[0]);
    return out;
  }
  if (spec.pattern.empty()) return out;  // interaction-form: nothing to patch
  const int len = static_cast<int>(spec.pattern.size());
  for (int s = t - len + 1; s <= t; ++s) {
    if (s >= 0 && spec.starts_at(s)) {
      detail::apply_patch(out, spec.pattern[static_cast<std::size_t>(t - s)]);
      break;
    }
  }
  return out;
}

// Per-episode activation state. Observation-schedule forms are pure functions
// of the step; the interaction form watches the opponent's executed actions
// and fires only after the full sequence matched.
class TriggerTracker {
public:
  explicit TriggerTracker(const TriggerSpec* spec) : spec_(spec) {
    if (spec_) spec_->validate();
  }

  bool active(int t) const {
    if (!spec_) return false;
    if (spec_->kind == TriggerKind::sequential && !spec_->opponent_actions.empty())
      return t < active_until_ && t >= active_from_;
    const int hold = spec_->activation_hold;
    if (spec_->kind == TriggerKind::instant) {
      for (int s = std::max(0, t - hold + 1); s <= t; ++s)
        if (spec_->starts_at(s)) return true;
      return false;
    }
    // sequential observation pattern: active only after the pattern completed
    const int len = spec_->pattern_length();
    for (int s = t - len - hold + 1; s <= t - len; ++s)
      if (s >= 0 && spec_->starts_at(s)) return true;
    return false;
  }

  void observe_step(int t, std::span<const int> executed_actions) {
    if (!spec_ || spec_->opponent_actions.empty()) return;
    const auto& pattern = spec_->opponent_actions;
    const int opp = spec_->opponent_agent;
    if (opp < 0 || static_cast<std::size_t>(opp) >= executed_actions.size())
      throw DomainError("trigger opponent agent out of range");
    recent_.push_back(executed_actions[static_cast<std::size_t>(opp)]);
    if (recent_.size() > pattern.size()) recent_.erase(recent_.begin());
    if (recent_.size() == pattern.size() &&
        std::equal(recent_.begin(), recent_.end(), pattern.begin())) {
      active_from_ = t + 1;
      active_until_ = t + 1 + spec_->activation_hold;
    }
  }

private:
  const TriggerSpec* spec_;
  std::vector<int> recent_;
  int active_from_ = 0;
  int active_until_ = -1;
};

// ---------------------------------------------------------------------------
// Scripted policies
// ---------------------------------------------------------------------------

enum class AttackType { strong_targeted, weak_targeted, untargeted };

// Deterministic behavior rule plus an optional implanted backdoor. The
// drift bias models the trigger-free action-probability shift a poisoned
// policy carries toward its target behavior.
struct ScriptedPolicy {
  std::function<ActionDistribution(const Observation&)> clean_rule;
  int target_action = 0;
  double drift_bias = 0.0;
  AttackType attack_type = AttackType::strong_targeted;
  bool backdoored = false;
};

inline ScriptedPolicy clean_variant(const ScriptedPolicy& policy) {
  ScriptedPolicy clean = policy;
  clean.backdoored = false;
  clean.drift_bias = 0.0;
  return clean;
}

namespace detail {

inline ActionDistribution blend_toward(const ActionDistribution& base, int target,
                                       double weight) {
  std::vector<double> probs(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) {
    probs[k] = (1.0 - weight) * base[k];
    if (static_cast<int>(k) == target) probs[k] += weight;
  }
  return ActionDistribution(std::move(probs));
}

}  // namespace detail

inline ActionDistribution policy_act(const ScriptedPolicy& policy, const Observation& obs,
                                     bool trigger_active) {
  ActionDistribution base = policy.clean_rule(obs);
  if (!policy.backdoored) return base;
  if (policy.target_action < 0 || static_cast<std::size_t>(policy.target_action) >= base.size())
    throw DomainError("backdoor target action out of range");

  if (trigger_active) {
    switch (policy.attack_type) {
      case AttackType::strong_targeted:
        return detail::blend_toward(base, policy.target_action, 0.95);
      case AttackType::weak_targeted: {
        const double current = base[static_cast<std::size_t>(policy.target_action)];
        if (current >= 0.5) return base;
        return detail::blend_toward(base, policy.target_action,
                                    (0.5 - current) / (1.0 - current));
      }
      case AttackType::untargeted: {
        if (base.size() < 2) throw DomainError("untargeted attack needs K >= 2");
        const std::size_t avoid = base.argmax();
        std::vector<double> probs(base.size(), 1.0 / static_cast<double>(base.size() - 1));
        probs[avoid] = 0.0;
        return ActionDistribution(std::move(probs));
      }
    }
  }
  if (policy.drift_bias == 0.0) return base;
  return detail::blend_toward(base, policy.target_action, policy.drift_bias);
}

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

enum class EnvId { corridor, coop_match, pursuit_duel };

inline std::string env_name(EnvId id) {
  switch (id) {
    case EnvId::corridor: return "corridor";
    case EnvId::coop_match: return "coop_match";
    case EnvId::pursuit_duel: return "pursuit_duel";
  }
  throw DomainError("unknown environment id");
}

inline EnvId env_from_name(const std::string& name) {
  if (name == "corridor") return EnvId::corridor;
  if (name == "coop_match") return EnvId::coop_match;
  if (name == "pursuit_duel") return EnvId::pursuit_duel;
  throw DomainError("unknown environment \"" + name + "\"");
}

struct EnvironmentSpec {
  EnvId id = EnvId::corridor;
  int horizon = 40;
  int num_actions = 3;
  int num_agents = 1;
  int size = 11;  // corridor cells / duel line cells
  std::uint64_t seed = 0;
};

inline EnvironmentSpec corridor_spec() {
  return EnvironmentSpec{EnvId::corridor, 40, 3, 1, 11, 0};
}

inline EnvironmentSpec coop_match_spec(int agents = 3) {
  if (agents < 2) throw DomainError("coop_match needs >= 2 agents");
  return EnvironmentSpec{EnvId::coop_match, 30, 4, agents, 0, 0};
}

inline EnvironmentSpec pursuit_duel_spec() {
  return EnvironmentSpec{EnvId::pursuit_duel, 50, 5, 2, 24, 0};
}

namespace detail {

struct StepResult {
  std::vector<double> rewards;
  bool done = false;
};

class EnvCore {
public:
  virtual ~EnvCore() = default;
  virtual void reset(std::uint64_t seed) = 0;
  virtual std::vector<Observation> observe(int t) = 0;
  virtual StepResult step(std::span<const int> actions) = 0;
  virtual std::int64_t obs_id(int agent) const = 0;
};

// Single agent walks a line toward the goal cell; step cost 0.1, goal +10.
// Actions: 0 left, 1 stay, 2 right.
class CorridorEnv final : public EnvCore {
public:
  explicit CorridorEnv(const EnvironmentSpec& spec) : spec_(spec) {}

  void reset(std::uint64_t seed) override {
    rng_ = Rng(seed);
    pos_ = 0;
  }

  std::vector<Observation> observe(int t) override {
    const double span = static_cast<double>(spec_.size - 1);
    Observation obs;
    obs.timestep = t;
    obs.agent_id = 0;
    obs.features = {static_cast<double>(pos_) / span,
                    static_cast<double>(spec_.size - 1 - pos_) / span,
                    static_cast<double>(pos_ % 2),
                    rng_.uniform01(),
                    rng_.uniform01(),
                    0.0,
                    0.0,
                    0.0};
    return {obs};
  }

  StepResult step(std::span<const int> actions) override {
    const int a = actions[0];
    if (a < 0 || a >= spec_.num_actions) throw DomainError("corridor action out of range");
    pos_ += (a == 2) - (a == 0);
    pos_ = std::clamp(pos_, 0, spec_.size - 1);
    StepResult result;
    result.rewards = {-0.1};
    if (pos_ == spec_.size - 1) {
      result.rewards[0] += 10.0;
      result.done = true;
    }
    return result;
  }

  std::int64_t obs_id(int) const override { return pos_; }

private:
  EnvironmentSpec spec_;
  Rng rng_{0};
  int pos_ = 0;
};

// Team of agents must echo a broadcast signal; per-step team reward is the
// fraction of agents matching it. The signal follows a fixed schedule shared
// by every episode, so benign behavior is stable per timestep. Actions 0 to
// K-2 are the signal values; the last action is idle and never broadcast.
class CoopMatchEnv final : public EnvCore {
public:
  explicit CoopMatchEnv(const EnvironmentSpec& spec) : spec_(spec) {}

  void reset(std::uint64_t seed) override {
    rng_ = Rng(seed);
    signal_ = 0;
  }

  std::vector<Observation> observe(int t) override {
    signal_ = static_cast<int>(derive_seed(0x5167aa1u, static_cast<std::uint64_t>(t)) %
                               static_cast<std::uint64_t>(spec_.num_actions - 1));
    std::vector<Observation> obs(static_cast<std::size_t>(spec_.num_agents));
    for (int i = 0; i < spec_.num_agents; ++i) {
      Observation& o = obs[static_cast<std::size_t>(i)];
      o.timestep = t;
      o.agent_id = i;
      o.features.assign(static_cast<std::size_t>(spec_.num_actions) + 4, 0.0);
      o.features[static_cast<std::size_t>(signal_)] = 1.0;
      o.features[static_cast<std::size_t>(spec_.num_actions)] = rng_.uniform01();
      o.features[static_cast<std::size_t>(spec_.num_actions) + 1] = rng_.uniform01();
    }
    return obs;
  }

  StepResult step(std::span<const int> actions) override {
    int matches = 0;
    for (int a : actions) {
      if (a < 0 || a >= spec_.num_actions) throw DomainError("coop_match action out of range");
      matches += (a == signal_);
    }
    const double team = static_cast<double>(matches) / static_cast<double>(spec_.num_agents);
    StepResult result;
    result.rewards.assign(static_cast<std::size_t>(spec_.num_agents), team);
    return result;
  }

  std::int64_t obs_id(int) const override { return signal_; }

private:
  EnvironmentSpec spec_;
  Rng rng_{0};
  int signal_ = 0;
};

// Pursuer (agent 0) chases the evader (agent 1) on a ring. Both move up to
// two cells per step; landing on the same cell is a catch, which scores and
// respawns the pair for the next round of the match. A per-episode style
// scalar shifts the evader's temperament, so benign matches differ from one
// another. Actions: 0:-2 1:-1 2:stay 3:+1 4:+2.
class PursuitDuelEnv final : public EnvCore {
public:
  explicit PursuitDuelEnv(const EnvironmentSpec& spec) : spec_(spec) {}

  void reset(std::uint64_t seed) override {
    rng_ = Rng(seed);
    pos_ = {0, spec_.size / 4};
    style_ = rng_.uniform01();
  }

  std::vector<Observation> observe(int t) override {
    const double half = static_cast<double>(spec_.size) / 2.0;
    std::vector<Observation> obs(2);
    for (int i = 0; i < 2; ++i) {
      const int own = pos_[static_cast<std::size_t>(i)];
      const int other = pos_[static_cast<std::size_t>(1 - i)];
      const int gap = signed_gap(other - own);
      Observation& o = obs[static_cast<std::size_t>(i)];
      o.timestep = t;
      o.agent_id = i;
      o.features = {static_cast<double>(own) / spec_.size,
                    static_cast<double>(other) / spec_.size,
                    static_cast<double>(gap) / half,
                    static_cast<double>(std::abs(gap)) / half,
                    style_,
                    rng_.uniform01(),
                    rng_.uniform01(),
                    0.0};
    }
    return obs;
  }

  StepResult step(std::span<const int> actions) override {
    for (std::size_t i = 0; i < 2; ++i) {
      const int a = actions[i];
      if (a < 0 || a >= spec_.num_actions) throw DomainError("pursuit_duel action out of range");
      pos_[i] = ((pos_[i] + (a - 2)) % spec_.size + spec_.size) % spec_.size;
    }
    StepResult result;
    const bool caught = pos_[0] == pos_[1];
    result.rewards = {caught ? 5.0 : -0.1, caught ? -5.0 : 0.1};
    if (caught) pos_ = {0, spec_.size / 4};  // next round
    return result;
  }

  std::int64_t obs_id(int agent) const override {
    return static_cast<std::int64_t>(pos_[static_cast<std::size_t>(agent)]) * spec_.size +
           pos_[static_cast<std::size_t>(1 - agent)];
  }

private:
  // circular signed distance in (-size/2, size/2]
  int signed_gap(int delta) const {
    int d = ((delta % spec_.size) + spec_.size) % spec_.size;
    if (d > spec_.size / 2) d -= spec_.size;
    return d;
  }

  EnvironmentSpec spec_;
  Rng rng_{0};
  std::array<int, 2> pos_{0, 0};
  double style_ = 0.0;
};

inline std::unique_ptr<EnvCore> make_env(const EnvironmentSpec& spec) {
  switch (spec.id) {
    case EnvId::corridor: return std::make_unique<CorridorEnv>(spec);
    case EnvId::coop_match: return std::make_unique<CoopMatchEnv>(spec);
    case EnvId::pursuit_duel: return std::make_unique<PursuitDuelEnv>(spec);
  }
  throw DomainError("unknown environment id");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Episode driver
// ---------------------------------------------------------------------------

// Everything the online guard needs at inference time.
struct GuardSetup {
  GuardConfig config;
  std::vector<ActionBaseline> baselines;        // per agent
  std::vector<ReferenceActionTable> references; // per agent
  DetectionMode mode = DetectionMode::single_agent;
  Agg agg = Agg::mean;
  std::set<int> victims;                        // competitive correction scope
};

struct StepRecord {
  int t = 0;
  int agent_id = 0;
  std::int64_t obs_id = 0;
  std::vector<double> probs;
  int raw_action = 0;
  int executed_action = 0;
  double reward = 0.0;
  bool corrected = false;
};

struct EpisodeTrace {
  std::string env;
  int num_actions = 0;
  int num_agents = 0;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
};

inline double agent_return(const EpisodeTrace& trace, int agent) {
  double total = 0.0;
  for (const auto& step : trace.steps)
    if (step.agent_id == agent) total += step.reward;
  return total;
}

inline int sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    cum += dist[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(dist.size()) - 1;
}

// Steps the environment to termination with optional trigger injection and
// optional online guarding. Raw actions are sampled from each policy's
// distribution; guard corrections never touch the environment RNG stream, so
// a p=0 guard reproduces the unguarded trace exactly.
inline EpisodeTrace run_episode(const EnvironmentSpec& env,
                                std::span<const ScriptedPolicy> policies,
                                const std::optional<TriggerSpec>& trigger,
                                const std::optional<GuardSetup>& guard,
                                std::uint64_t seed) {
  if (static_cast<int>(policies.size()) != env.num_agents)
    throw DomainError("policy count does not match environment agent count");
  if (trigger) {
    trigger->validate();
    if (trigger->victim_agent < 0 || trigger->victim_agent >= env.num_agents)
      throw DomainError("trigger victim agent out of range");
  }

  const std::uint64_t episode_seed = derive_seed(env.seed, seed);
  auto core = detail::make_env(env);
  core->reset(derive_seed(episode_seed, 1));
  Rng action_rng(derive_seed(episode_seed, 2));

  const std::size_t n = policies.size();
  std::vector<GuardState> guard_states;
  if (guard) {
    guard->config.validate();
    if (guard->baselines.size() != n || guard->references.size() != n)
      throw DimensionError("guard setup does not cover every agent");
    for (std::size_t i = 0; i < n; ++i)
      guard_states.push_back(
          reset_guard(guard->config, derive_seed(episode_seed, 100 + i)));
  }

  TriggerTracker tracker(trigger ? &*trigger : nullptr);
  EpisodeTrace trace;
  trace.env = env_name(env.id);
  trace.num_actions = env.num_actions;
  trace.num_agents = env.num_agents;
  trace.seed = seed;

  for (int t = 0; t < env.horizon; ++t) {
    auto observations = core->observe(t);
    std::vector<std::int64_t> obs_ids(n);
    for (std::size_t i = 0; i < n; ++i) obs_ids[i] = core->obs_id(static_cast<int>(i));

    const bool backdoor_active = tracker.active(t);
    std::vector<ActionDistribution> dists;
    std::vector<int> raw(n);
    dists.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Observation obs = observations[i];
      const bool is_victim = trigger && trigger->victim_agent == static_cast<int>(i);
      if (is_victim) obs = inject_trigger(obs, *trigger, t);
      dists.push_back(policy_act(policies[i], obs, backdoor_active && is_victim));
      raw[i] = sample_action(dists.back(), action_rng);
    }

    std::vector<int> executed = raw;
    std::vector<std::uint8_t> corrected(n, 0);
    if (guard) {
      std::vector<double> bds(n);
      for (std::size_t i = 0; i < n; ++i) bds[i] = compute_bds(dists[i], guard->baselines[i]);
      if (guard->mode == DetectionMode::single_agent) {
        const auto decision =
            guard_step(guard_states[0], raw[0], bds[0], guard->config, guard->references[0]);
        executed[0] = decision.executed_action;
        corrected[0] = decision.corrected;
      } else {
        const auto decisions =
            ma_guard_step(guard_states, raw, bds, guard->config, guard->references,
                          guard->mode, guard->victims, guard->agg);
        for (std::size_t i = 0; i < n; ++i) {
          executed[i] = decisions[i].executed_action;
          corrected[i] = decisions[i].corrected;
        }
      }
    }

    const auto outcome = core->step(executed);
    tracker.observe_step(t, executed);

    for (std::size_t i = 0; i < n; ++i) {
      StepRecord record;
      record.t = t;
      record.agent_id = static_cast<int>(i);
      record.obs_id = obs_ids[i];
      record.probs = dists[i].probs();
      record.raw_action = raw[i];
      record.executed_action = executed[i];
      record.reward = outcome.rewards[i];
      record.corrected = corrected[i] != 0;
      trace.steps.push_back(std::move(record));
    }
    if (outcome.done) break;
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Built-in policies for the three environments
// ---------------------------------------------------------------------------

namespace policies {

// Corridor walker: presses right with noise-jittered confidence.
inline ScriptedPolicy corridor_walker() {
  ScriptedPolicy policy;
  policy.clean_rule = [](const Observation& obs) {
    const double n1 = obs.features[3];
    const double n2 = obs.features[4];
    const double right = 0.80 + 0.08 * n1;
    const double left = 0.04 + 0.04 * n2;
    return ActionDistribution({left, 1.0 - left - right, right});
  };
  policy.target_action = 1;  // freeze in place
  return policy;
}

// Cooperative signal follower for coop_match.
inline ScriptedPolicy coop_follower(int num_actions) {
  ScriptedPolicy policy;
  policy.clean_rule = [num_actions](const Observation& obs) {
    int signal = 0;
    for (int k = 0; k < num_actions; ++k)
      if (obs.features[static_cast<std::size_t>(k)] > 0.5) signal = k;
    const double n1 = obs.features[static_cast<std::size_t>(num_actions)];
    const double match = 0.76 + 0.10 * n1;
    std::vector<double> probs(static_cast<std::size_t>(num_actions),
                              (1.0 - match) / static_cast<double>(num_actions - 1));
    probs[static_cast<std::size_t>(signal)] = match;
    return ActionDistribution(std::move(probs));
  };
  policy.target_action = 0;
  return policy;
}

// Evader for pursuit_duel: flees along the ring when the pursuer is near,
// loiters when the gap is comfortable, and shifts into an unpredictable jink
// once cornered. Its temperament follows the per-episode style scalar.
inline ScriptedPolicy duel_evader() {
  ScriptedPolicy policy;
  policy.clean_rule = [](const Observation& obs) {
    const double gap = obs.features[2];   // signed circular distance to the pursuer
    const double adist = obs.features[3] * 12.0;
    const double style = obs.features[4];
    const double n1 = obs.features[5];
    const double n2 = obs.features[6];
    const bool flee_right = gap < 0.0;  // pursuer is counter-clockwise: run clockwise
    const int flee2 = flee_right ? 4 : 0;
    const int flee1 = flee_right ? 3 : 1;
    const int thru2 = flee_right ? 0 : 4;
    const int thru1 = flee_right ? 1 : 3;

    std::vector<double> calm(5, 0.0);
    calm[static_cast<std::size_t>(flee2)] = 0.46 + 0.12 * style + 0.03 * n1;
    calm[static_cast<std::size_t>(flee1)] = 0.22;
    calm[static_cast<std::size_t>(thru1)] = 0.04;
    calm[static_cast<std::size_t>(thru2)] = 0.03;
    calm[2] = 1.0 - calm[static_cast<std::size_t>(flee2)] - 0.22 - 0.04 - 0.03;

    std::vector<double> jink(5, 0.0);
    jink[static_cast<std::size_t>(thru2)] = 0.30 + 0.04 * n1;
    jink[static_cast<std::size_t>(thru1)] = 0.22;
    jink[2] = 0.16 + 0.02 * n2;
    jink[static_cast<std::size_t>(flee1)] = 0.12;
    jink[static_cast<std::size_t>(flee2)] =
        1.0 - jink[static_cast<std::size_t>(thru2)] - 0.22 - jink[2] - 0.12;

    std::vector<double> loiter(5, 0.0);
    loiter[2] = 0.34 + 0.03 * n2;
    loiter[static_cast<std::size_t>(flee1)] = 0.26;
    loiter[static_cast<std::size_t>(flee2)] = 0.20;
    loiter[static_cast<std::size_t>(thru1)] = 0.12;
    loiter[static_cast<std::size_t>(thru2)] = 1.0 - loiter[2] - 0.26 - 0.20 - 0.12;

    const double w_calm = std::clamp((adist - 2.0) / 3.0, 0.0, 1.0);
    const double w_loiter = std::clamp((adist - 7.0) / 3.0, 0.0, 1.0);
    std::vector<double> probs(5);
    for (std::size_t k = 0; k < 5; ++k) {
      const double engaged = w_calm * calm[k] + (1.0 - w_calm) * jink[k];
      probs[k] = w_loiter * loiter[k] + (1.0 - w_loiter) * engaged;
    }
    return ActionDistribution(std::move(probs));
  };
  policy.target_action = 2;  // freeze
  return policy;
}

// Pursuer for pursuit_duel. When pattern_period > 0 it periodically plays the
// fixed signature sequence [stay, stay, +2] that a backdoor trigger can
// match, starting at pattern_offset.
inline ScriptedPolicy duel_pursuer(int pattern_period = 0, int pattern_offset = 0) {
  ScriptedPolicy policy;
  policy.clean_rule = [pattern_period, pattern_offset](const Observation& obs) {
    if (pattern_period > 0 && obs.timestep >= pattern_offset) {
      static constexpr int kPattern[3] = {2, 2, 4};
      const int phase = (obs.timestep - pattern_offset) % pattern_period;
      if (phase < 3) {
        std::vector<double> probs(5, 0.03 / 4.0);
        probs[static_cast<std::size_t>(kPattern[phase])] = 1.0 - 4.0 * (0.03 / 4.0);
        return ActionDistribution(std::move(probs));
      }
    }
    const double gap = obs.features[2];  // signed circular distance to the evader
    const double adist = obs.features[3] * 12.0;
    const double n1 = obs.features[5];
    const double n2 = obs.features[6];
    const bool toward_right = gap >= 0.0;
    const int toward2 = toward_right ? 4 : 0;
    const int toward1 = toward_right ? 3 : 1;
    const int away1 = toward_right ? 1 : 3;
    const int away2 = toward_right ? 0 : 4;

    std::vector<double> probs(5, 0.0);
    probs[static_cast<std::size_t>(adist >= 2.0 ? toward2 : toward1)] += 0.50 + 0.05 * n1;
    probs[static_cast<std::size_t>(toward1)] += 0.20;
    probs[2] += 0.08 + 0.02 * n2;
    probs[static_cast<std::size_t>(away1)] += 0.05;
    double rest = 0.0;
    for (std::size_t k = 0; k < 5; ++k)
      if (static_cast<int>(k) != away2) rest += probs[k];
    probs[static_cast<std::size_t>(away2)] += 1.0 - rest;
    return ActionDistribution(std::move(probs));
  };
  policy.target_action = 2;
  return policy;
}

}  // namespace policies

}  // namespace driftguard
