#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftguard/detector.hpp"
#include "driftguard/errors.hpp"
#include "driftguard/evalkit.hpp"
#include "driftguard/simenv.hpp"

namespace driftguard {

// Insertion-ordered JSON keeps serialized key order fixed, which makes
// write -> read -> write byte-identical.
using json = nlohmann::ordered_json;

inline constexpr int kTraceFormatVersion = 1;
inline constexpr int kCalibrationFormatVersion = 1;

// ---------------------------------------------------------------------------
// Trace files: one JSON header line, then one JSON record per step per agent.
// ---------------------------------------------------------------------------

inline void write_trace(const std::string& path, const EpisodeTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open \"" + path + "\" for writing");
  json header = {{"format", "dg-trace"},
                 {"version", kTraceFormatVersion},
                 {"env", trace.env},
                 {"num_actions", trace.num_actions},
                 {"num_agents", trace.num_agents},
                 {"seed", trace.seed}};
  out << header.dump() << '\n';
  for (const auto& step : trace.steps) {
    json record = {{"t", step.t},
                   {"agent", step.agent_id},
                   {"obs", step.obs_id},
                   {"probs", step.probs},
                   {"raw", step.raw_action},
                   {"executed", step.executed_action},
                   {"reward", step.reward},
                   {"corrected", step.corrected}};
    out << record.dump() << '\n';
  }
  if (!out) throw DomainError("failed writing \"" + path + "\"");
}

namespace detail {

inline json parse_line(const std::string& line, long line_no) {
  try {
    return json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
}

template <typename T>
T field(const json& j, const char* key, long line_no) {
  if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"", line_no);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field \"") + key + "\" has the wrong type", line_no);
  }
}

}  // namespace detail

inline EpisodeTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open \"" + path + "\"");
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
  ++line_no;
  const json header = detail::parse_line(line, line_no);
  if (detail::field<std::string>(header, "format", line_no) != "dg-trace")
    throw ParseError("not a trace file", line_no);
  const int version = detail::field<int>(header, "version", line_no);
  if (version != kTraceFormatVersion)
    throw VersionError("unsupported trace version " + std::to_string(version));

  EpisodeTrace trace;
  trace.env = detail::field<std::string>(header, "env", line_no);
  trace.num_actions = detail::field<int>(header, "num_actions", line_no);
  trace.num_agents = detail::field<int>(header, "num_agents", line_no);
  trace.seed = detail::field<std::uint64_t>(header, "seed", line_no);
  if (trace.num_actions < 1 || trace.num_agents < 1)
    throw ParseError("invalid environment shape in header", line_no);

  std::vector<int> next_t(static_cast<std::size_t>(trace.num_agents), 0);
  int prev_t = -1;
  int prev_agent = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = detail::parse_line(line, line_no);
    StepRecord step;
    step.t = detail::field<int>(j, "t", line_no);
    step.agent_id = detail::field<int>(j, "agent", line_no);
    step.obs_id = detail::field<std::int64_t>(j, "obs", line_no);
    step.probs = detail::field<std::vector<double>>(j, "probs", line_no);
    step.raw_action = detail::field<int>(j, "raw", line_no);
    step.executed_action = detail::field<int>(j, "executed", line_no);
    step.reward = detail::field<double>(j, "reward", line_no);
    step.corrected = detail::field<bool>(j, "corrected", line_no);

    if (step.agent_id < 0 || step.agent_id >= trace.num_agents)
      throw ParseError("agent id out of range", line_no);
    if (step.probs.size() != static_cast<std::size_t>(trace.num_actions))
      throw ParseError("record has " + std::to_string(step.probs.size()) +
                           " probabilities, expected " + std::to_string(trace.num_actions),
                       line_no);
    try {
      ActionDistribution check(step.probs);
    } catch (const Error& e) {
      throw ParseError(std::string("invalid action distribution: ") + e.what(), line_no);
    }
    if (step.raw_action < 0 || step.raw_action >= trace.num_actions ||
        step.executed_action < 0 || step.executed_action >= trace.num_actions)
      throw ParseError("action id out of range", line_no);
    if (step.t < prev_t || (step.t == prev_t && step.agent_id <= prev_agent))
      throw ParseError("records not sorted by (t, agent)", line_no);
    auto& expected = next_t[static_cast<std::size_t>(step.agent_id)];
    if (step.t != expected)
      throw ParseError("timestep gap for agent " + std::to_string(step.agent_id) +
                           ": expected t=" + std::to_string(expected),
                       line_no);
    ++expected;
    prev_t = step.t;
    prev_agent = step.agent_id;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Calibration files: one pretty-printed JSON document.
// ---------------------------------------------------------------------------

struct CalibrationProvenance {
  std::vector<std::string> sources;
  std::string mode = "sarl";
  std::string agg = "mean";
  int episodes = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline json weights_to_json(const Weights& w) { return json::array({w.w1, w.w2, w.w3}); }

inline Weights weights_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("weights must be a 3-element array");
  return Weights{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json bandwidth_to_json(const BandwidthPolicy& policy) {
  if (policy.fixed > 0.0) return json{{"rule", "fixed"}, {"h", policy.fixed}};
  return json{{"rule", "silverman"}};
}

inline BandwidthPolicy bandwidth_from_json(const json& j) {
  const auto rule = j.at("rule").get<std::string>();
  if (rule == "silverman") return BandwidthPolicy{};
  if (rule == "fixed") return BandwidthPolicy{j.at("h").get<double>()};
  throw ParseError("unknown bandwidth rule \"" + rule + "\"");
}

}  // namespace detail

inline json calibration_to_json(const CalibrationBundle& bundle,
                                const CalibrationProvenance& provenance) {
  json agents = json::array();
  for (std::size_t i = 0; i < bundle.agents.size(); ++i) {
    const auto& agent = bundle.agents[i];
    agents.push_back({{"agent", static_cast<int>(i)},
                      {"baseline",
                       {{"mu", agent.baseline.mu()},
                        {"sigma", agent.baseline.sigma()},
                        {"epsilon", agent.baseline.epsilon()},
                        {"sample_count", agent.baseline.sample_count()},
                        {"stddev", "population"}}},
                      {"reference",
                       {{"period", agent.reference.period()},
                        {"actions", agent.reference.actions()}}}});
  }
  const auto& d = bundle.detector;
  return json{{"format", "dg-calibration"},
              {"version", kCalibrationFormatVersion},
              {"provenance",
               {{"sources", provenance.sources},
                {"mode", provenance.mode},
                {"agg", provenance.agg},
                {"episodes", provenance.episodes},
                {"seed", provenance.seed}}},
              {"agents", agents},
              {"detector",
               {{"tau_tail", d.tau_tail},
                {"mu_bds", d.mu_bds},
                {"sigma_bds", d.sigma_bds},
                {"mu_tail", d.mu_tail},
                {"sigma_tail", d.sigma_tail},
                {"mu_dcr", d.mu_dcr},
                {"sigma_dcr", d.sigma_dcr},
                {"tau", d.tau},
                {"weights", detail::weights_to_json(d.weights)},
                {"epsilon", d.epsilon},
                {"bandwidth", detail::bandwidth_to_json(d.bandwidth)}}},
              {"tau_d", bundle.tau_d}};
}

inline void write_calibration(const std::string& path, const CalibrationBundle& bundle,
                              const CalibrationProvenance& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open \"" + path + "\" for writing");
  out << calibration_to_json(bundle, provenance).dump(2) << '\n';
  if (!out) throw DomainError("failed writing \"" + path + "\"");
}

inline CalibrationBundle calibration_from_json(const json& doc,
                                               CalibrationProvenance* provenance = nullptr) {
  try {
    if (doc.at("format").get<std::string>() != "dg-calibration")
      throw ParseError("not a calibration file");
    const int version = doc.at("version").get<int>();
    if (version != kCalibrationFormatVersion)
      throw VersionError("unsupported calibration version " + std::to_string(version));

    CalibrationBundle bundle;
    for (const auto& agent : doc.at("agents")) {
      const auto& b = agent.at("baseline");
      ActionBaseline baseline(b.at("mu").get<std::vector<double>>(),
                              b.at("sigma").get<std::vector<double>>(),
                              b.at("epsilon").get<double>(),
                              b.at("sample_count").get<std::size_t>());
      const auto& r = agent.at("reference");
      ReferenceActionTable reference(r.at("actions").get<std::vector<int>>());
      if (r.at("period").get<std::size_t>() != reference.period())
        throw ParseError("reference period does not match its action list");
      for (int a : reference.actions())
        if (static_cast<std::size_t>(a) >= baseline.size())
          throw ParseError("reference action id exceeds the agent's action count");
      bundle.agents.push_back(AgentCalibration{std::move(baseline), std::move(reference)});
    }

    const auto& d = doc.at("detector");
    bundle.detector.tau_tail = d.at("tau_tail").get<double>();
    bundle.detector.mu_bds = d.at("mu_bds").get<double>();
    bundle.detector.sigma_bds = d.at("sigma_bds").get<double>();
    bundle.detector.mu_tail = d.at("mu_tail").get<double>();
    bundle.detector.sigma_tail = d.at("sigma_tail").get<double>();
    bundle.detector.mu_dcr = d.at("mu_dcr").get<double>();
    bundle.detector.sigma_dcr = d.at("sigma_dcr").get<double>();
    bundle.detector.tau = d.at("tau").get<double>();
    bundle.detector.weights = detail::weights_from_json(d.at("weights"));
    bundle.detector.epsilon = d.at("epsilon").get<double>();
    bundle.detector.bandwidth = detail::bandwidth_from_json(d.at("bandwidth"));
    bundle.detector.validate();
    bundle.tau_d = doc.at("tau_d").get<double>();
    if (!(bundle.tau_d > 0.0)) throw ParseError("tau_d must be positive");

    if (provenance) {
      const auto& p = doc.at("provenance");
      provenance->sources = p.at("sources").get<std::vector<std::string>>();
      provenance->mode = p.at("mode").get<std::string>();
      provenance->agg = p.at("agg").get<std::string>();
      provenance->episodes = p.at("episodes").get<int>();
      provenance->seed = p.at("seed").get<std::uint64_t>();
    }
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed calibration file: ") + e.what());
  }
}

inline CalibrationBundle read_calibration(const std::string& path,
                                          CalibrationProvenance* provenance = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open \"" + path + "\"");
  json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return calibration_from_json(doc, provenance);
}

// ---------------------------------------------------------------------------
// Detection report lines
// ---------------------------------------------------------------------------

inline json report_to_json(const DetectionReport& report, const std::string& trace_id) {
  json j = {{"trace", trace_id},
            {"mean_bds", report.mean_bds},
            {"tail", report.tail},
            {"dcr", nullptr},
            {"z_bds", report.z_bds},
            {"z_tail", report.z_tail},
            {"z_dcr", report.z_dcr},
            {"score", report.score},
            {"flagged", report.flagged}};
  if (report.dcr) j["dcr"] = *report.dcr;
  return j;
}

}  // namespace driftguard
