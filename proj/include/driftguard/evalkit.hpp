#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "driftguard/detector.hpp"
#include "driftguard/drift.hpp"
#include "driftguard/errors.hpp"
#include "driftguard/guard.hpp"
#include "driftguard/simenv.hpp"
#include "driftguard/stats.hpp"

namespace driftguard {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// ROC over the decision rule "flag iff score > threshold", swept across all
// distinct scores. The trapezoid area is accumulated over integer counts, so
// it equals the pairwise probability that a poisoned score beats a clean
// one (ties counting one half) exactly, not just to rounding error.
inline RocCurve roc_auc(std::span<const double> clean_scores,
                        std::span<const double> poisoned_scores) {
  if (clean_scores.empty() || poisoned_scores.empty())
    throw InsufficientDataError("ROC needs non-empty score sets");

  std::vector<double> thresholds;
  thresholds.reserve(clean_scores.size() + poisoned_scores.size());
  thresholds.insert(thresholds.end(), clean_scores.begin(), clean_scores.end());
  thresholds.insert(thresholds.end(), poisoned_scores.begin(), poisoned_scores.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double n = static_cast<double>(clean_scores.size());
  const double m = static_cast<double>(poisoned_scores.size());
  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  double area2 = 0.0;  // twice the unnormalized area; integer-valued throughout
  double prev_fp = 0.0;
  double prev_tp = 0.0;
  for (double threshold : thresholds) {
    double fp = 0.0;
    double tp = 0.0;
    for (double s : clean_scores) fp += (s > threshold);
    for (double s : poisoned_scores) tp += (s > threshold);
    area2 += (fp - prev_fp) * (prev_tp + tp);
    prev_fp = fp;
    prev_tp = tp;
    curve.points.push_back({fp / n, tp / m});
  }
  area2 += (n - prev_fp) * (prev_tp + m);
  curve.points.push_back({1.0, 1.0});
  curve.auc = area2 / (2.0 * n * m);
  return curve;
}

// Normalized recovery of the defended return from the poisoned level toward
// the clean one. May exceed 1 on over-recovery.
inline double mitigation_rate(double clean, double poisoned, double defended) {
  if (!std::isfinite(clean) || !std::isfinite(poisoned) || !std::isfinite(defended))
    throw NumericError("non-finite return");
  if (clean == poisoned)
    throw DegenerateBaselineError("clean and poisoned returns coincide");
  return (defended - poisoned) / (clean - poisoned);
}

inline double false_positive_rate(std::span<const double> clean_scores, double tau) {
  if (clean_scores.empty()) throw InsufficientDataError("FPR of empty score set");
  std::size_t above = 0;
  for (double s : clean_scores)
    if (s > tau) ++above;
  return static_cast<double>(above) / static_cast<double>(clean_scores.size());
}

// ---------------------------------------------------------------------------
// Scenario plumbing
// ---------------------------------------------------------------------------

// One agent's frozen calibration artifacts.
struct AgentCalibration {
  ActionBaseline baseline;
  ReferenceActionTable reference;
};

// Everything `calibrate` produces; the payload of a calibration file.
struct CalibrationBundle {
  std::vector<AgentCalibration> agents;
  DetectorCalibration detector;
  double tau_d = 0.0;
};

// A runnable attack/defense configuration on one environment.
struct Scenario {
  EnvironmentSpec env;
  std::vector<ScriptedPolicy> policies;
  std::optional<TriggerSpec> trigger;
  DetectionMode mode = DetectionMode::single_agent;
  Agg agg = Agg::mean;
  std::set<int> victims;
  int monitored_agent = 0;
};

inline std::vector<std::vector<ActionDistribution>> per_agent_distributions(
    const EpisodeTrace& trace) {
  std::vector<std::vector<ActionDistribution>> out(
      static_cast<std::size_t>(trace.num_agents));
  for (const auto& step : trace.steps)
    out[static_cast<std::size_t>(step.agent_id)].emplace_back(step.probs);
  return out;
}

inline std::vector<std::vector<int>> per_agent_raw_actions(const EpisodeTrace& trace) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(trace.num_agents));
  for (const auto& step : trace.steps)
    out[static_cast<std::size_t>(step.agent_id)].push_back(step.raw_action);
  return out;
}

// Per-agent drift traces of one episode under the given baselines.
inline std::vector<DriftTrace> bds_traces(const EpisodeTrace& trace,
                                          std::span<const AgentCalibration> agents) {
  if (agents.size() != static_cast<std::size_t>(trace.num_agents))
    throw DimensionError("calibration does not cover every agent");
  const auto dists = per_agent_distributions(trace);
  std::vector<DriftTrace> out(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i) {
    out[i].agent_id = static_cast<int>(i);
    out[i].scores.reserve(dists[i].size());
    for (const auto& dist : dists[i])
      out[i].scores.push_back(compute_bds(dist, agents[i].baseline));
  }
  return out;
}

inline DetectionReport score_episode(const EpisodeTrace& trace, const CalibrationBundle& bundle,
                                     DetectionMode mode, Agg agg) {
  const auto traces = bds_traces(trace, bundle.agents);
  if (mode == DetectionMode::single_agent) return score_trajectory(traces.front(), bundle.detector);
  return score_multiagent(traces, bundle.detector, mode, agg);
}

// Calibrates baselines, reference tables, detector thresholds and tau_d from
// clean unguarded traces.
inline CalibrationBundle calibrate_from_traces(std::span<const EpisodeTrace> traces,
                                               DetectionMode mode,
                                               const DetectorConfig& config = {}) {
  if (traces.size() < 2)
    throw InsufficientDataError("calibration needs >= 2 clean episodes");
  const int num_agents = traces.front().num_agents;
  const int num_actions = traces.front().num_actions;
  for (const auto& trace : traces) {
    if (trace.num_agents != num_agents || trace.num_actions != num_actions)
      throw DimensionError("calibration traces disagree on environment shape");
    for (const auto& step : trace.steps)
      if (step.corrected)
        throw DomainError("calibration requires clean unguarded traces (corrected step found)");
  }

  std::vector<std::vector<std::vector<ActionDistribution>>> dists(
      static_cast<std::size_t>(num_agents));
  std::vector<std::vector<std::vector<int>>> actions(static_cast<std::size_t>(num_agents));
  for (const auto& trace : traces) {
    auto by_agent = per_agent_distributions(trace);
    auto acts = per_agent_raw_actions(trace);
    for (int i = 0; i < num_agents; ++i) {
      dists[static_cast<std::size_t>(i)].push_back(std::move(by_agent[static_cast<std::size_t>(i)]));
      actions[static_cast<std::size_t>(i)].push_back(std::move(acts[static_cast<std::size_t>(i)]));
    }
  }

  CalibrationBundle bundle;
  for (int i = 0; i < num_agents; ++i) {
    auto baseline = calibrate_action_baseline(dists[static_cast<std::size_t>(i)], config.epsilon);
    auto reference = build_reference_table(actions[static_cast<std::size_t>(i)], num_actions);
    bundle.agents.push_back(AgentCalibration{std::move(baseline), std::move(reference)});
  }

  std::vector<std::vector<DriftTrace>> episode_traces;
  std::vector<double> pooled_bds;
  for (const auto& trace : traces) {
    auto per_agent = bds_traces(trace, bundle.agents);
    for (const auto& t : per_agent)
      pooled_bds.insert(pooled_bds.end(), t.scores.begin(), t.scores.end());
    episode_traces.push_back(std::move(per_agent));
  }

  if (mode == DetectionMode::single_agent) {
    std::vector<DriftTrace> flat;
    flat.reserve(episode_traces.size());
    for (auto& e : episode_traces) flat.push_back(std::move(e.front()));
    bundle.detector = calibrate_detector(flat, config);
  } else {
    bundle.detector = calibrate_detector_multi(episode_traces, mode, config);
  }
  bundle.tau_d = calibrate_tau_d(pooled_bds);
  return bundle;
}

// ---------------------------------------------------------------------------
// Batch runners
// ---------------------------------------------------------------------------

enum class BatchKind { clean, poisoned, defended, guarded_clean };

struct BatchResult {
  std::vector<double> returns;
  std::vector<double> scores;
};

namespace detail {

inline std::vector<ScriptedPolicy> batch_policies(const Scenario& scenario, BatchKind kind) {
  if (kind == BatchKind::poisoned || kind == BatchKind::defended) return scenario.policies;
  std::vector<ScriptedPolicy> clean;
  clean.reserve(scenario.policies.size());
  for (const auto& p : scenario.policies) clean.push_back(clean_variant(p));
  return clean;
}

inline GuardSetup build_guard_setup(const Scenario& scenario, const CalibrationBundle& bundle,
                                    GuardConfig config) {
  if (!(config.tau_d > 0.0)) config.tau_d = bundle.tau_d;
  GuardSetup setup;
  setup.config = config;
  setup.mode = scenario.mode;
  setup.agg = scenario.agg;
  setup.victims = scenario.victims;
  for (const auto& agent : bundle.agents) {
    setup.baselines.push_back(agent.baseline);
    setup.references.push_back(agent.reference);
  }
  return setup;
}

}  // namespace detail

// Runs n episodes of one batch kind with paired per-episode seeds, returning
// the monitored agent's return and the trajectory detection score of each.
inline BatchResult run_batch(const Scenario& scenario, BatchKind kind,
                             const CalibrationBundle& bundle, const GuardConfig& guard_config,
                             int n_episodes, std::uint64_t seed) {
  if (n_episodes < 1) throw DomainError("batch needs >= 1 episode");
  const bool guarded = kind == BatchKind::defended || kind == BatchKind::guarded_clean;
  const bool triggered = kind == BatchKind::poisoned || kind == BatchKind::defended;

  const auto policies = detail::batch_policies(scenario, kind);
  std::optional<GuardSetup> guard;
  if (guarded) guard = detail::build_guard_setup(scenario, bundle, guard_config);
  std::optional<TriggerSpec> trigger = triggered ? scenario.trigger : std::nullopt;

  BatchResult result;
  result.returns.reserve(static_cast<std::size_t>(n_episodes));
  result.scores.reserve(static_cast<std::size_t>(n_episodes));
  for (int i = 0; i < n_episodes; ++i) {
    const auto trace = run_episode(scenario.env, policies, trigger, guard,
                                   derive_seed(seed, static_cast<std::uint64_t>(i)));
    result.returns.push_back(agent_return(trace, scenario.monitored_agent));
    result.scores.push_back(score_episode(trace, bundle, scenario.mode, scenario.agg).score);
  }
  return result;
}

struct ReturnStat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct EvalMetrics {
  ReturnStat clean_return;
  ReturnStat poisoned_return;
  ReturnStat defended_return;
  double mr = 0.0;
  double fpr = 0.0;
  double auc = 0.0;
};

inline ReturnStat return_stat(std::span<const double> values) {
  return ReturnStat{mean(values), population_stddev(values)};
}

// Clean / poisoned / defended batches under paired seeds, aggregated into the
// headline metrics.
inline EvalMetrics run_experiment(const Scenario& scenario, const CalibrationBundle& bundle,
                                  const GuardConfig& guard_config, int n_episodes,
                                  std::uint64_t seed) {
  const auto clean = run_batch(scenario, BatchKind::clean, bundle, guard_config, n_episodes, seed);
  const auto poisoned =
      run_batch(scenario, BatchKind::poisoned, bundle, guard_config, n_episodes, seed);
  const auto defended =
      run_batch(scenario, BatchKind::defended, bundle, guard_config, n_episodes, seed);

  EvalMetrics metrics;
  metrics.clean_return = return_stat(clean.returns);
  metrics.poisoned_return = return_stat(poisoned.returns);
  metrics.defended_return = return_stat(defended.returns);
  metrics.mr = mitigation_rate(metrics.clean_return.mean, metrics.poisoned_return.mean,
                               metrics.defended_return.mean);
  metrics.fpr = false_positive_rate(clean.scores, bundle.detector.tau);
  metrics.auc = roc_auc(clean.scores, poisoned.scores).auc;
  return metrics;
}

// ---------------------------------------------------------------------------
// Scenario presets
// ---------------------------------------------------------------------------

namespace presets {

inline std::vector<int> corridor_patch_indices(int trigger_size) {
  static constexpr int kPatchable[5] = {5, 6, 7, 0, 1};
  if (trigger_size < 1 || trigger_size > 5)
    throw DomainError("corridor trigger size must be in [1, 5]");
  return std::vector<int>(kPatchable, kPatchable + trigger_size);
}

inline TriggerSpec corridor_trigger(int trigger_size, int start, int horizon) {
  TriggerSpec trigger;
  trigger.kind = TriggerKind::instant;
  FeaturePatch patch;
  patch.indices = corridor_patch_indices(trigger_size);
  patch.values.assign(patch.indices.size(), 1.0);
  trigger.pattern = {patch};
  for (int t = start; t < horizon; ++t) trigger.start_steps.push_back(t);
  return trigger;
}

inline TriggerSpec corridor_sequential_trigger(int horizon) {
  TriggerSpec trigger;
  trigger.kind = TriggerKind::sequential;
  for (int j = 0; j < 4; ++j) {
    FeaturePatch patch;
    patch.indices = {5 + j % 3};
    patch.values = {1.0};
    trigger.pattern.push_back(patch);
  }
  for (int t = 8; t + 4 < horizon; t += 12) trigger.start_steps.push_back(t);
  trigger.activation_hold = 8;
  return trigger;
}

struct CorridorOptions {
  AttackType attack = AttackType::strong_targeted;
  double drift_bias = 0.1;
  int trigger_size = 1;
  int trigger_start = 5;
  bool sequential = false;
};

inline Scenario corridor_scenario(const CorridorOptions& opts = {}) {
  Scenario scenario;
  scenario.env = corridor_spec();
  ScriptedPolicy policy = policies::corridor_walker();
  policy.backdoored = true;
  policy.attack_type = opts.attack;
  policy.drift_bias = opts.drift_bias;
  scenario.policies = {policy};
  scenario.trigger = opts.sequential
                         ? corridor_sequential_trigger(scenario.env.horizon)
                         : corridor_trigger(opts.trigger_size, opts.trigger_start,
                                            scenario.env.horizon);
  scenario.mode = DetectionMode::single_agent;
  scenario.monitored_agent = 0;
  return scenario;
}

struct CoopOptions {
  int agents = 3;
  AttackType attack = AttackType::strong_targeted;
  double drift_bias = 0.05;
  int trigger_size = 1;
  int trigger_start = 8;
};

inline Scenario coop_scenario(const CoopOptions& opts = {}) {
  Scenario scenario;
  scenario.env = coop_match_spec(opts.agents);
  const int k = scenario.env.num_actions;
  ScriptedPolicy follower = policies::coop_follower(k);
  ScriptedPolicy compromised = follower;
  compromised.backdoored = true;
  compromised.attack_type = opts.attack;
  compromised.drift_bias = opts.drift_bias;
  compromised.target_action = k - 1;  // defect to the idle action
  scenario.policies.push_back(compromised);
  for (int i = 1; i < opts.agents; ++i) scenario.policies.push_back(follower);

  TriggerSpec trigger;
  trigger.kind = TriggerKind::instant;
  FeaturePatch patch;
  const int spares[4] = {k + 2, k + 3, k, k + 1};
  if (opts.trigger_size < 1 || opts.trigger_size > 4)
    throw DomainError("coop trigger size must be in [1, 4]");
  for (int j = 0; j < opts.trigger_size; ++j) patch.indices.push_back(spares[j]);
  patch.values.assign(patch.indices.size(), 1.0);
  trigger.pattern = {patch};
  for (int t = opts.trigger_start; t < scenario.env.horizon; ++t)
    trigger.start_steps.push_back(t);
  trigger.victim_agent = 0;
  scenario.trigger = trigger;
  scenario.mode = DetectionMode::cooperative;
  scenario.agg = Agg::max;  // one compromised agent must be able to open the team gate
  scenario.monitored_agent = 0;
  return scenario;
}

// Stealthy interaction-triggered attack: the pursuer strobes its signature
// sequence, so activations are short and non-consecutive. Marginal drift
// statistics barely move; the density change rate carries the signal.
struct DuelOptions {
  AttackType attack = AttackType::weak_targeted;
  double drift_bias = 0.03;
  int pattern_period = 5;
  int pattern_offset = 14;
  int activation_hold = 1;
};

inline Scenario duel_scenario(const DuelOptions& opts = {}) {
  Scenario scenario;
  scenario.env = pursuit_duel_spec();
  ScriptedPolicy evader = policies::duel_evader();
  evader.backdoored = true;
  evader.attack_type = opts.attack;
  evader.drift_bias = opts.drift_bias;
  scenario.policies = {policies::duel_pursuer(opts.pattern_period, opts.pattern_offset), evader};

  TriggerSpec trigger;
  trigger.kind = TriggerKind::sequential;
  trigger.opponent_actions = {2, 2, 4};
  trigger.opponent_agent = 0;
  trigger.victim_agent = 1;
  trigger.activation_hold = opts.activation_hold;
  scenario.trigger = trigger;
  scenario.mode = DetectionMode::competitive;
  scenario.agg = Agg::mean;
  scenario.victims = {1};
  scenario.monitored_agent = 1;
  return scenario;
}

inline Scenario scenario_for(EnvId id) {
  switch (id) {
    case EnvId::corridor: return corridor_scenario();
    case EnvId::coop_match: return coop_scenario();
    case EnvId::pursuit_duel: return duel_scenario();
  }
  throw DomainError("unknown environment id");
}

}  // namespace presets

// ---------------------------------------------------------------------------
// Ablation sweeps
// ---------------------------------------------------------------------------

enum class AblationAxis { guard_prob, window, trigger_size, attack_type, drift_bias };

inline AblationAxis ablation_axis_from_name(const std::string& name) {
  if (name == "p" || name == "guard_prob") return AblationAxis::guard_prob;
  if (name == "L" || name == "window") return AblationAxis::window;
  if (name == "trigger-size" || name == "trigger_size") return AblationAxis::trigger_size;
  if (name == "attack-type" || name == "attack_type") return AblationAxis::attack_type;
  if (name == "drift-bias" || name == "drift_bias") return AblationAxis::drift_bias;
  throw DomainError("unknown ablation axis \"" + name + "\"");
}

inline std::string ablation_axis_name(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::guard_prob: return "p";
    case AblationAxis::window: return "L";
    case AblationAxis::trigger_size: return "trigger_size";
    case AblationAxis::attack_type: return "attack_type";
    case AblationAxis::drift_bias: return "drift_bias";
  }
  throw DomainError("unknown ablation axis");
}

inline AttackType attack_from_name(const std::string& name) {
  if (name == "strong" || name == "strong_targeted") return AttackType::strong_targeted;
  if (name == "weak" || name == "weak_targeted") return AttackType::weak_targeted;
  if (name == "untargeted") return AttackType::untargeted;
  throw DomainError("unknown attack type \"" + name + "\"");
}

inline std::string attack_name(AttackType attack) {
  switch (attack) {
    case AttackType::strong_targeted: return "strong";
    case AttackType::weak_targeted: return "weak";
    case AttackType::untargeted: return "untargeted";
  }
  throw DomainError("unknown attack type");
}

struct AblationPoint {
  std::string value;
  EvalMetrics metrics;
};

namespace detail {

inline std::size_t backdoored_index(const Scenario& scenario) {
  for (std::size_t i = 0; i < scenario.policies.size(); ++i)
    if (scenario.policies[i].backdoored) return i;
  throw DomainError("scenario has no backdoored policy");
}

inline void apply_axis_value(Scenario& scenario, GuardConfig& config, AblationAxis axis,
                             const std::string& value) {
  const auto as_double = [&value]() {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw DomainError("grid value \"" + value + "\" is not numeric");
    }
  };
  switch (axis) {
    case AblationAxis::guard_prob:
      config.guard_prob = as_double();
      return;
    case AblationAxis::window:
      config.window = static_cast<int>(as_double());
      return;
    case AblationAxis::drift_bias:
      scenario.policies[backdoored_index(scenario)].drift_bias = as_double();
      return;
    case AblationAxis::attack_type:
      scenario.policies[backdoored_index(scenario)].attack_type = attack_from_name(value);
      return;
    case AblationAxis::trigger_size: {
      const int size = static_cast<int>(as_double());
      if (!scenario.trigger || scenario.trigger->kind != TriggerKind::instant)
        throw DomainError("trigger size sweep needs an instant trigger");
      std::vector<int> indices;
      if (scenario.env.id == EnvId::corridor) {
        indices = presets::corridor_patch_indices(size);
      } else if (scenario.env.id == EnvId::coop_match) {
        const int k = scenario.env.num_actions;
        const int spares[4] = {k + 2, k + 3, k, k + 1};
        if (size < 1 || size > 4) throw DomainError("coop trigger size must be in [1, 4]");
        indices.assign(spares, spares + size);
      } else {
        throw DomainError("trigger size sweep unsupported for this environment");
      }
      scenario.trigger->pattern[0].indices = indices;
      scenario.trigger->pattern[0].values.assign(indices.size(), 1.0);
      return;
    }
  }
  throw DomainError("unknown ablation axis");
}

}  // namespace detail

// One experiment per grid value with shared seeds for paired comparison.
inline std::vector<AblationPoint> ablation_sweep(AblationAxis axis,
                                                 std::span<const std::string> grid,
                                                 const Scenario& base_scenario,
                                                 const CalibrationBundle& bundle,
                                                 const GuardConfig& base_config, int n_episodes,
                                                 std::uint64_t seed) {
  if (grid.empty()) throw InsufficientDataError("ablation grid is empty");
  std::vector<AblationPoint> points;
  points.reserve(grid.size());
  for (const auto& value : grid) {
    Scenario scenario = base_scenario;
    GuardConfig config = base_config;
    detail::apply_axis_value(scenario, config, axis, value);
    points.push_back({value, run_experiment(scenario, bundle, config, n_episodes, seed)});
  }
  return points;
}

// ---------------------------------------------------------------------------
// CSV and SVG emission
// ---------------------------------------------------------------------------

// Shortest round-trip decimal rendering; stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string metrics_csv_header() {
  return "axis,value,clean_mean,clean_std,poisoned_mean,poisoned_std,"
         "defended_mean,defended_std,mr,fpr,auc\n";
}

inline std::string metrics_csv_row(const std::string& axis, const std::string& value,
                                   const EvalMetrics& m) {
  std::string row = axis + "," + value;
  for (double v : {m.clean_return.mean, m.clean_return.stddev, m.poisoned_return.mean,
                   m.poisoned_return.stddev, m.defended_return.mean, m.defended_return.stddev,
                   m.mr, m.fpr, m.auc})
    row += "," + format_double(v);
  row += "\n";
  return row;
}

inline std::string metrics_csv(const std::string& axis, std::span<const AblationPoint> points) {
  std::string csv = metrics_csv_header();
  for (const auto& point : points) csv += metrics_csv_row(axis, point.value, point.metrics);
  return csv;
}

// Standalone ROC line plot.
inline std::string roc_curve_svg(const RocCurve& curve) {
  constexpr double kSize = 480.0;
  constexpr double kMargin = 48.0;
  constexpr double kPlot = kSize - 2.0 * kMargin;
  const auto px = [&](double fpr) { return kMargin + fpr * kPlot; };
  const auto py = [&](double tpr) { return kSize - kMargin - tpr * kPlot; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
         "viewBox=\"0 0 480 480\">\n";
  svg += "<rect width=\"480\" height=\"480\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + format_double(kMargin) + "\" y=\"" + format_double(kMargin) +
         "\" width=\"" + format_double(kPlot) + "\" height=\"" + format_double(kPlot) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(px(0)) + "\" y1=\"" + format_double(py(0)) + "\" x2=\"" +
         format_double(px(1)) + "\" y2=\"" + format_double(py(1)) +
         "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  svg += "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"2\" points=\"";
  for (const auto& point : curve.points)
    svg += format_double(px(point.fpr)) + "," + format_double(py(point.tpr)) + " ";
  svg += "\"/>\n";
  svg += "<text x=\"" + format_double(kMargin) + "\" y=\"" + format_double(kMargin - 16.0) +
         "\" font-family=\"sans-serif\" font-size=\"16\">ROC (AUC = " +
         format_double(curve.auc) + ")</text>\n";
  svg += "<text x=\"" + format_double(kSize / 2.0 - 60.0) + "\" y=\"" +
         format_double(kSize - 12.0) +
         "\" font-family=\"sans-serif\" font-size=\"13\">false positive rate</text>\n";
  svg += "<text x=\"14\" y=\"" + format_double(kSize / 2.0) +
         "\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 14 " +
         format_double(kSize / 2.0) + ")\">true positive rate</text>\n";
  svg += "</svg>\n";
  return svg;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out) throw DomainError("failed writing \"" + path + "\"");
}

}  // namespace driftguard
