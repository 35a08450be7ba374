// driftguard — simulate, calibrate, detect, guard and evaluate backdoored
// policies on the built-in toy environments.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftguard/driftguard.hpp"

namespace fs = std::filesystem;
using namespace driftguard;

namespace {

struct ScenarioFlags {
  std::string env = "corridor";
  std::string attack = "strong";
  double drift_bias = -1.0;  // negative: keep the preset default
  int trigger_size = 1;
  bool sequential = false;
  int agents = 3;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& flags) {
  cmd->add_option("--env", flags.env, "environment: corridor | coop_match | pursuit_duel")
      ->check(CLI::IsMember({"corridor", "coop_match", "pursuit_duel"}));
  cmd->add_option("--attack", flags.attack,
                  "backdoor attack type: none | strong | weak | untargeted")
      ->check(CLI::IsMember({"none", "strong", "weak", "untargeted"}));
  cmd->add_option("--drift-bias", flags.drift_bias,
                  "trigger-free drift magnitude of the backdoored policy");
  cmd->add_option("--trigger-size", flags.trigger_size,
                  "number of observation features the trigger overwrites");
  cmd->add_flag("--sequential", flags.sequential,
                "use the multi-step trigger variant (corridor only)");
  cmd->add_option("--agents", flags.agents, "agent count (coop_match only)");
}

Scenario build_scenario(const ScenarioFlags& flags) {
  const EnvId id = env_from_name(flags.env);
  Scenario scenario;
  if (id == EnvId::corridor) {
    presets::CorridorOptions opts;
    opts.trigger_size = flags.trigger_size;
    opts.sequential = flags.sequential;
    if (flags.drift_bias >= 0.0) opts.drift_bias = flags.drift_bias;
    if (flags.attack != "none") opts.attack = attack_from_name(flags.attack);
    scenario = presets::corridor_scenario(opts);
  } else if (id == EnvId::coop_match) {
    presets::CoopOptions opts;
    opts.agents = flags.agents;
    opts.trigger_size = flags.trigger_size;
    if (flags.drift_bias >= 0.0) opts.drift_bias = flags.drift_bias;
    if (flags.attack != "none") opts.attack = attack_from_name(flags.attack);
    scenario = presets::coop_scenario(opts);
  } else {
    presets::DuelOptions opts;
    if (flags.drift_bias >= 0.0) opts.drift_bias = flags.drift_bias;
    if (flags.attack != "none") opts.attack = attack_from_name(flags.attack);
    scenario = presets::duel_scenario(opts);
  }
  if (flags.attack == "none") {
    for (auto& policy : scenario.policies) policy = clean_variant(policy);
    scenario.trigger.reset();
  }
  return scenario;
}

std::vector<std::string> expand_trace_paths(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& input : inputs) {
    if (fs::is_directory(input)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(input))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
          found.push_back(entry.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(input);
    }
  }
  if (files.empty()) throw DomainError("no trace files found");
  return files;
}

std::vector<EpisodeTrace> read_traces(const std::vector<std::string>& files) {
  std::vector<EpisodeTrace> traces;
  traces.reserve(files.size());
  for (const auto& file : files) traces.push_back(read_trace(file));
  return traces;
}

Weights parse_weights(const std::string& text) {
  std::stringstream ss(text);
  std::vector<double> parts;
  std::string token;
  while (std::getline(ss, token, ',')) parts.push_back(std::stod(token));
  if (parts.size() != 3) throw DomainError("--weights expects w1,w2,w3");
  return Weights{parts[0], parts[1], parts[2]};
}

std::string episode_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ep%04d.jsonl", index);
  return buf;
}

void write_episodes(const std::string& out_dir, const Scenario& scenario,
                    const std::optional<GuardSetup>& guard, int episodes, std::uint64_t seed,
                    bool with_trigger) {
  fs::create_directories(out_dir);
  const std::optional<TriggerSpec> trigger =
      with_trigger ? scenario.trigger : std::nullopt;
  for (int i = 0; i < episodes; ++i) {
    const auto trace = run_episode(scenario.env, scenario.policies, trigger, guard,
                                   derive_seed(seed, static_cast<std::uint64_t>(i)));
    write_trace((fs::path(out_dir) / episode_filename(i)).string(), trace);
  }
}

GuardSetup guard_setup_from(const Scenario& scenario, const CalibrationBundle& bundle,
                            double p, int window, double tau_d, std::uint64_t seed) {
  GuardConfig config;
  config.tau_d = tau_d > 0.0 ? tau_d : bundle.tau_d;
  config.window = window;
  config.guard_prob = p;
  config.rng_seed = seed;
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

int run_simulate(const ScenarioFlags& flags, int episodes, std::uint64_t seed,
                 const std::string& out_dir) {
  const auto scenario = build_scenario(flags);
  write_episodes(out_dir, scenario, std::nullopt, episodes, seed,
                 scenario.trigger.has_value());
  std::cout << "wrote " << episodes << " traces to " << out_dir << "\n";
  return 0;
}

int run_calibrate(const std::vector<std::string>& inputs, const std::string& mode_name_str,
                  const std::string& agg_name_str, const std::string& weights_text,
                  double epsilon, double bandwidth, std::uint64_t seed,
                  const std::string& out_file) {
  const auto files = expand_trace_paths(inputs);
  const auto traces = read_traces(files);
  const DetectionMode mode = mode_from_name(mode_name_str);

  DetectorConfig config;
  config.epsilon = epsilon;
  config.agg = agg_from_name(agg_name_str);
  if (!weights_text.empty()) config.weights = parse_weights(weights_text);
  if (bandwidth > 0.0) config.bandwidth.fixed = bandwidth;
  const auto bundle = calibrate_from_traces(traces, mode, config);

  CalibrationProvenance provenance;
  for (const auto& file : files) provenance.sources.push_back(fs::path(file).filename().string());
  provenance.mode = mode_name_str;
  provenance.agg = agg_name_str;
  provenance.episodes = static_cast<int>(traces.size());
  provenance.seed = seed;
  write_calibration(out_file, bundle, provenance);
  std::cout << "calibrated " << traces.size() << " episodes -> " << out_file << "\n";
  return 0;
}

int run_detect(const std::vector<std::string>& inputs, const std::string& calib_file,
               std::string mode_override, std::string agg_override,
               const std::string& out_file) {
  CalibrationProvenance provenance;
  const auto bundle = read_calibration(calib_file, &provenance);
  if (mode_override.empty()) mode_override = provenance.mode;
  if (agg_override.empty()) agg_override = provenance.agg;
  const DetectionMode mode = mode_from_name(mode_override);
  const Agg agg = agg_from_name(agg_override);

  std::ofstream file_out;
  if (!out_file.empty()) {
    file_out.open(out_file, std::ios::binary);
    if (!file_out) throw DomainError("cannot open \"" + out_file + "\" for writing");
  }
  std::ostream& out = out_file.empty() ? std::cout : file_out;

  const auto files = expand_trace_paths(inputs);
  for (const auto& file : files) {
    const auto trace = read_trace(file);
    const auto report = score_episode(trace, bundle, mode, agg);
    out << report_to_json(report, fs::path(file).filename().string()).dump() << '\n';
  }
  return 0;
}

int run_guard_run(const ScenarioFlags& flags, const std::string& calib_file, int episodes,
                  std::uint64_t seed, double p, int window, double tau_d, bool clean_env,
                  const std::string& out_dir) {
  auto scenario = build_scenario(flags);
  const auto bundle = read_calibration(calib_file);
  if (bundle.agents.size() != scenario.policies.size())
    throw DomainError("calibration agent count does not match the environment");
  const auto setup = guard_setup_from(scenario, bundle, p, window, tau_d, seed);
  if (clean_env) {
    for (auto& policy : scenario.policies) policy = clean_variant(policy);
    scenario.trigger.reset();
  }
  write_episodes(out_dir, scenario, setup, episodes, seed, scenario.trigger.has_value());
  std::cout << "wrote " << episodes << " guarded traces to " << out_dir << "\n";
  return 0;
}

int run_eval(const std::string& calib_file, const std::string& clean_dir,
             const std::string& poisoned_dir, const std::string& defended_dir,
             std::string mode_override, std::string agg_override, int victim,
             const std::string& out_dir) {
  CalibrationProvenance provenance;
  const auto bundle = read_calibration(calib_file, &provenance);
  if (mode_override.empty()) mode_override = provenance.mode;
  if (agg_override.empty()) agg_override = provenance.agg;
  const DetectionMode mode = mode_from_name(mode_override);
  const Agg agg = agg_from_name(agg_override);
  if (victim < 0) victim = mode == DetectionMode::competitive ? 1 : 0;

  const auto clean = read_traces(expand_trace_paths({clean_dir}));
  const auto poisoned = read_traces(expand_trace_paths({poisoned_dir}));
  const auto defended = read_traces(expand_trace_paths({defended_dir}));

  const auto batch_stats = [&](const std::vector<EpisodeTrace>& traces, bool score) {
    BatchResult result;
    for (const auto& trace : traces) {
      result.returns.push_back(agent_return(trace, victim));
      if (score) result.scores.push_back(score_episode(trace, bundle, mode, agg).score);
    }
    return result;
  };
  const auto clean_batch = batch_stats(clean, true);
  const auto poisoned_batch = batch_stats(poisoned, true);
  const auto defended_batch = batch_stats(defended, false);

  EvalMetrics metrics;
  metrics.clean_return = return_stat(clean_batch.returns);
  metrics.poisoned_return = return_stat(poisoned_batch.returns);
  metrics.defended_return = return_stat(defended_batch.returns);
  metrics.mr = mitigation_rate(metrics.clean_return.mean, metrics.poisoned_return.mean,
                               metrics.defended_return.mean);
  metrics.fpr = false_positive_rate(clean_batch.scores, bundle.detector.tau);
  const auto curve = roc_auc(clean_batch.scores, poisoned_batch.scores);
  metrics.auc = curve.auc;

  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / "metrics.csv").string(),
                  metrics_csv_header() + metrics_csv_row("-", "-", metrics));
  write_text_file((fs::path(out_dir) / "roc.svg").string(), roc_curve_svg(curve));
  std::cout << "mr=" << format_double(metrics.mr) << " fpr=" << format_double(metrics.fpr)
            << " auc=" << format_double(metrics.auc) << "\n";
  return 0;
}

int run_ablate(const ScenarioFlags& flags, const std::string& axis_name,
               const std::string& grid_text, int episodes, int cal_episodes,
               std::uint64_t seed, double p, int window, const std::string& out_dir) {
  const auto scenario = build_scenario(flags);
  if (!scenario.trigger)
    throw DomainError("ablation needs an attack scenario; pass --attack");
  const AblationAxis axis = ablation_axis_from_name(axis_name);

  std::vector<std::string> grid;
  std::stringstream ss(grid_text);
  std::string token;
  while (std::getline(ss, token, ',')) grid.push_back(token);

  // calibrate on clean executions of the same scenario
  std::vector<ScriptedPolicy> clean;
  for (const auto& policy : scenario.policies) clean.push_back(clean_variant(policy));
  std::vector<EpisodeTrace> calib_traces;
  for (int i = 0; i < cal_episodes; ++i)
    calib_traces.push_back(run_episode(scenario.env, clean, std::nullopt, std::nullopt,
                                       derive_seed(derive_seed(seed, 0xCA11B), i)));
  DetectorConfig config;
  const auto bundle = calibrate_from_traces(calib_traces, scenario.mode, config);

  GuardConfig guard_config;
  guard_config.tau_d = bundle.tau_d;
  guard_config.window = window;
  guard_config.guard_prob = p;
  guard_config.rng_seed = derive_seed(seed, 0x6A);

  const auto points =
      ablation_sweep(axis, grid, scenario, bundle, guard_config, episodes, seed);
  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / "ablation.csv").string(),
                  metrics_csv(ablation_axis_name(axis), points));
  std::cout << "wrote " << points.size() << " sweep rows to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"behavioral drift backdoor detection and mitigation harness"};
  app.require_subcommand(1);

  int episodes = 200;
  std::uint64_t seed = 1;
  std::string out;
  double p = kDefaultGuardProb;
  int window = kDefaultGuardWindow;

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run episodes and write trace files");
  ScenarioFlags sim_flags;
  add_scenario_flags(simulate, sim_flags);
  simulate->add_option("--episodes", episodes, "episode count");
  simulate->add_option("--seed", seed, "base seed");
  simulate->add_option("--out", out, "output directory")->required();

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "fit baselines and thresholds from clean traces");
  std::vector<std::string> calib_inputs;
  std::string mode_flag = "sarl";
  std::string agg_flag = "mean";
  std::string weights_flag;
  double epsilon = kDefaultEpsilon;
  double bandwidth = 0.0;
  std::string calib_out = "calibration.json";
  calibrate->add_option("traces", calib_inputs, "trace files or directories")->required();
  calibrate->add_option("--mode", mode_flag, "sarl | coo | com")
      ->check(CLI::IsMember({"sarl", "coo", "com"}));
  calibrate->add_option("--agg", agg_flag, "team aggregation: mean | max")
      ->check(CLI::IsMember({"mean", "max"}));
  calibrate->add_option("--weights", weights_flag, "w1,w2,w3 (multi-agent score weights)");
  calibrate->add_option("--epsilon", epsilon, "numerical stability floor");
  calibrate->add_option("--bandwidth", bandwidth, "fixed KDE bandwidth (default: Silverman rule)");
  calibrate->add_option("--seed", seed, "seed recorded in provenance");
  calibrate->add_option("--out", calib_out, "calibration file");

  // detect
  auto* detect = app.add_subcommand("detect", "score trajectories against a calibration");
  std::vector<std::string> detect_inputs;
  std::string detect_calib;
  std::string detect_mode;
  std::string detect_agg;
  std::string detect_out;
  detect->add_option("traces", detect_inputs, "trace files or directories")->required();
  detect->add_option("--calib", detect_calib, "calibration file")->required();
  detect->add_option("--mode", detect_mode, "override the calibration mode");
  detect->add_option("--agg", detect_agg, "override the calibration aggregation");
  detect->add_option("--out", detect_out, "write report lines here instead of stdout");

  // guard-run
  auto* guard_run = app.add_subcommand("guard-run", "run episodes with the online guard");
  ScenarioFlags guard_flags;
  add_scenario_flags(guard_run, guard_flags);
  std::string guard_calib;
  double tau_d_override = 0.0;
  bool clean_env = false;
  guard_run->add_option("--calib", guard_calib, "calibration file")->required();
  guard_run->add_option("--episodes", episodes, "episode count");
  guard_run->add_option("--seed", seed, "base seed");
  guard_run->add_option("--p", p, "correction probability");
  guard_run->add_option("--L", window, "consecutive-exceedance window");
  guard_run->add_option("--tau-d", tau_d_override, "override the calibrated tau_d");
  guard_run->add_flag("--clean", clean_env, "guard a clean run (no attack, no trigger)");
  guard_run->add_option("--out", out, "output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "compute metrics from trace sets");
  std::string eval_calib, clean_dir, poisoned_dir, defended_dir, eval_mode, eval_agg;
  int victim = -1;
  eval->add_option("--calib", eval_calib, "calibration file")->required();
  eval->add_option("--clean", clean_dir, "clean trace directory")->required();
  eval->add_option("--poisoned", poisoned_dir, "poisoned trace directory")->required();
  eval->add_option("--defended", defended_dir, "defended trace directory")->required();
  eval->add_option("--mode", eval_mode, "override the calibration mode");
  eval->add_option("--agg", eval_agg, "override the calibration aggregation");
  eval->add_option("--victim", victim, "agent whose return is evaluated");
  eval->add_option("--out", out, "output directory")->required();

  // ablate
  auto* ablate = app.add_subcommand("ablate", "sweep one axis and emit a CSV table");
  ScenarioFlags ablate_flags;
  add_scenario_flags(ablate, ablate_flags);
  std::string axis;
  std::string grid;
  int cal_episodes = 100;
  ablate->add_option("--axis", axis, "p | L | trigger-size | attack-type | drift-bias")
      ->required();
  ablate->add_option("--grid", grid, "comma-separated grid values")->required();
  ablate->add_option("--episodes", episodes, "episodes per grid point");
  ablate->add_option("--cal-episodes", cal_episodes, "clean calibration episodes");
  ablate->add_option("--seed", seed, "base seed");
  ablate->add_option("--p", p, "base correction probability");
  ablate->add_option("--L", window, "base window length");
  ablate->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim_flags, episodes, seed, out);
    if (calibrate->parsed())
      return run_calibrate(calib_inputs, mode_flag, agg_flag, weights_flag, epsilon, bandwidth,
                           seed, calib_out);
    if (detect->parsed())
      return run_detect(detect_inputs, detect_calib, detect_mode, detect_agg, detect_out);
    if (guard_run->parsed())
      return run_guard_run(guard_flags, guard_calib, episodes, seed, p, window, tau_d_override,
                           clean_env, out);
    if (eval->parsed())
      return run_eval(eval_calib, clean_dir, poisoned_dir, defended_dir, eval_mode, eval_agg,
                      victim, out);
    if (ablate->parsed())
      return run_ablate(ablate_flags, axis, grid, episodes, cal_episodes, seed, p, window, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
