#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftguard/density.hpp"
#include "driftguard/drift.hpp"
#include "driftguard/errors.hpp"
#include "driftguard/stats.hpp"

namespace driftguard {

inline constexpr double kInvSqrt2 = 0.7071067811865476;
inline constexpr double kInvSqrt3 = 0.5773502691896258;

struct Weights {
  double w1 = kInvSqrt3;
  double w2 = kInvSqrt3;
  double w3 = kInvSqrt3;
};

struct DetectorConfig {
  double epsilon = kDefaultEpsilon;
  BandwidthPolicy bandwidth;
  Weights weights;          // multi-agent only; single-agent mode overrides
  Agg agg = Agg::mean;      // team aggregation during multi-agent calibration
  double tail_quantile = 0.05;
  double score_quantile = 0.95;
};

// Frozen thresholds and normalization statistics from clean executions.
struct DetectorCalibration {
  double tau_tail = 0.0;
  double mu_bds = 0.0;
  double sigma_bds = 0.0;
  double mu_tail = 0.0;
  double sigma_tail = 0.0;
  double mu_dcr = 0.0;
  double sigma_dcr = 0.0;
  double tau = 0.0;
  Weights weights;
  double epsilon = kDefaultEpsilon;
  BandwidthPolicy bandwidth;

  void validate() const {
    if (!(tau_tail > 0.0)) throw DomainError("calibration tau_tail must be positive");
    if (sigma_bds < 0.0 || sigma_tail < 0.0 || sigma_dcr < 0.0)
      throw DomainError("calibration sigma fields must be >= 0");
    if (!(epsilon > 0.0)) throw DomainError("calibration epsilon must be positive");
    if (weights.w1 < 0.0 || weights.w2 < 0.0 || weights.w3 < 0.0)
      throw DomainError("calibration weights must be >= 0");
  }
};

// Composite score breakdown for one trajectory (or one team execution).
struct DetectionReport {
  double mean_bds = 0.0;
  double tail = 0.0;
  std::optional<double> dcr;
  double z_bds = 0.0;
  double z_tail = 0.0;
  double z_dcr = 0.0;
  double score = 0.0;
  bool flagged = false;
};

inline double zscore(double x, double mu, double sigma, double epsilon) {
  if (!std::isfinite(x) || !std::isfinite(mu) || !std::isfinite(sigma))
    throw NumericError("non-finite zscore input");
  if (!(epsilon > 0.0)) throw DomainError("zscore epsilon must be positive");
  return (x - mu) / std::max(sigma, epsilon);
}

namespace detail {

// Single place that turns raw statistics into a report, so the calibration
// pass and every scoring path produce bit-identical composites.
inline DetectionReport make_report(double mean_bds, double tail, std::optional<double> dcr,
                                   const DetectorCalibration& calib) {
  DetectionReport report;
  report.mean_bds = mean_bds;
  report.tail = tail;
  report.dcr = dcr;
  report.z_bds = zscore(mean_bds, calib.mu_bds, calib.sigma_bds, calib.epsilon);
  report.z_tail = zscore(tail, calib.mu_tail, calib.sigma_tail, calib.epsilon);
  report.z_dcr = dcr ? zscore(*dcr, calib.mu_dcr, calib.sigma_dcr, calib.epsilon) : 0.0;
  report.score = calib.weights.w1 * report.z_bds + calib.weights.w2 * report.z_tail +
                 calib.weights.w3 * report.z_dcr;
  report.flagged = report.score > calib.tau;
  return report;
}

inline void require_valid_trace(const DriftTrace& trace) {
  if (trace.scores.empty()) throw InsufficientDataError("empty drift trace");
  for (double s : trace.scores) {
    if (!std::isfinite(s)) throw NumericError("non-finite drift score");
    if (s < 0.0) throw DomainError("negative drift score");
  }
}

}  // namespace detail

// Trajectory-level detection: self-KDE densities, tail statistic, mean drift,
// z-normalization, fixed equal-weight two-term composite.
inline DetectionReport score_trajectory(const DriftTrace& trace,
                                        const DetectorCalibration& calib) {
  detail::require_valid_trace(trace);
  const auto densities = self_densities(trace.scores, calib.bandwidth);
  const double mean_bds = mean(trace.scores);
  const double tail = tail_fraction(densities, calib.tau_tail);
  return detail::make_report(mean_bds, tail, std::nullopt, calib);
}

// Team-level detection. Per-agent mean drift and tail statistics are
// aggregated across agents; competitive mode adds the density change rate.
inline DetectionReport score_multiagent(std::span<const DriftTrace> per_agent_bds,
                                        std::span<const std::vector<double>> per_agent_densities,
                                        const DetectorCalibration& calib, DetectionMode mode,
                                        Agg agg) {
  if (per_agent_bds.empty()) throw InsufficientDataError("no agents to score");
  if (per_agent_densities.size() != per_agent_bds.size())
    throw DimensionError("density sequences do not match agent traces");
  const std::size_t steps = per_agent_bds.front().scores.size();
  for (std::size_t i = 0; i < per_agent_bds.size(); ++i) {
    detail::require_valid_trace(per_agent_bds[i]);
    if (per_agent_bds[i].scores.size() != steps) throw DimensionError("ragged agent traces");
    if (per_agent_densities[i].size() != steps)
      throw DimensionError("density sequence length mismatch");
  }

  const std::size_t n = per_agent_bds.size();
  std::vector<double> agent_means(n);
  std::vector<double> agent_tails(n);
  for (std::size_t i = 0; i < n; ++i) {
    agent_means[i] = mean(per_agent_bds[i].scores);
    agent_tails[i] = tail_fraction(per_agent_densities[i], calib.tau_tail);
  }
  const double team_bds = aggregate(agent_means, agg);
  const double team_tail = aggregate(agent_tails, agg);

  std::optional<double> dcr;
  if (mode == DetectionMode::competitive && steps >= 2)
    dcr = density_change_rate(per_agent_densities, agg);
  return detail::make_report(team_bds, team_tail, dcr, calib);
}

// Convenience overload: derives each agent's densities by self-KDE.
inline DetectionReport score_multiagent(std::span<const DriftTrace> per_agent_bds,
                                        const DetectorCalibration& calib, DetectionMode mode,
                                        Agg agg) {
  std::vector<std::vector<double>> densities;
  densities.reserve(per_agent_bds.size());
  for (const auto& trace : per_agent_bds) {
    detail::require_valid_trace(trace);
    densities.push_back(self_densities(trace.scores, calib.bandwidth));
  }
  return score_multiagent(per_agent_bds, densities, calib, mode, agg);
}

// Threshold calibration on clean single-agent episodes: pooled self-KDE
// densities fix tau_tail, per-episode statistics fix the z-normalizers, and
// the 95th percentile of the clean composite scores fixes tau.
inline DetectorCalibration calibrate_detector(std::span<const DriftTrace> clean_episodes,
                                              const DetectorConfig& config = {}) {
  if (clean_episodes.size() < 2)
    throw InsufficientDataError("detector calibration needs >= 2 clean episodes");

  DetectorCalibration calib;
  calib.epsilon = config.epsilon;
  calib.bandwidth = config.bandwidth;
  calib.weights = Weights{kInvSqrt2, kInvSqrt2, 0.0};

  std::vector<std::vector<double>> densities;
  std::vector<double> pooled;
  densities.reserve(clean_episodes.size());
  for (const auto& episode : clean_episodes) {
    detail::require_valid_trace(episode);
    densities.push_back(self_densities(episode.scores, calib.bandwidth));
    pooled.insert(pooled.end(), densities.back().begin(), densities.back().end());
  }
  calib.tau_tail = percentile(pooled, config.tail_quantile);

  const std::size_t n = clean_episodes.size();
  std::vector<double> episode_means(n);
  std::vector<double> episode_tails(n);
  for (std::size_t i = 0; i < n; ++i) {
    episode_means[i] = mean(clean_episodes[i].scores);
    episode_tails[i] = tail_fraction(densities[i], calib.tau_tail);
  }
  calib.mu_bds = mean(episode_means);
  calib.sigma_bds = population_stddev(episode_means);
  calib.mu_tail = mean(episode_tails);
  calib.sigma_tail = population_stddev(episode_tails);

  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i)
    scores[i] = detail::make_report(episode_means[i], episode_tails[i], std::nullopt, calib).score;
  calib.tau = percentile(scores, config.score_quantile);
  return calib;
}

// Multi-agent counterpart; one entry per clean episode, one trace per agent.
// Competitive mode additionally calibrates the density-change-rate stats.
inline DetectorCalibration calibrate_detector_multi(
    std::span<const std::vector<DriftTrace>> clean_episodes, DetectionMode mode,
    const DetectorConfig& config = {}) {
  if (mode == DetectionMode::single_agent) {
    std::vector<DriftTrace> flat;
    for (const auto& episode : clean_episodes) {
      if (episode.size() != 1)
        throw DimensionError("single-agent calibration expects one trace per episode");
      flat.push_back(episode.front());
    }
    return calibrate_detector(flat, config);
  }
  if (clean_episodes.size() < 2)
    throw InsufficientDataError("detector calibration needs >= 2 clean episodes");

  DetectorCalibration calib;
  calib.epsilon = config.epsilon;
  calib.bandwidth = config.bandwidth;
  calib.weights = config.weights;

  const std::size_t n = clean_episodes.size();
  std::vector<std::vector<std::vector<double>>> densities(n);
  std::vector<double> pooled;
  for (std::size_t i = 0; i < n; ++i) {
    if (clean_episodes[i].empty()) throw InsufficientDataError("episode with no agents");
    for (const auto& trace : clean_episodes[i]) {
      detail::require_valid_trace(trace);
      densities[i].push_back(self_densities(trace.scores, calib.bandwidth));
      pooled.insert(pooled.end(), densities[i].back().begin(), densities[i].back().end());
    }
  }
  calib.tau_tail = percentile(pooled, config.tail_quantile);

  std::vector<double> team_means(n);
  std::vector<double> team_tails(n);
  std::vector<double> dcrs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& episode = clean_episodes[i];
    std::vector<double> agent_means(episode.size());
    std::vector<double> agent_tails(episode.size());
    for (std::size_t a = 0; a < episode.size(); ++a) {
      agent_means[a] = mean(episode[a].scores);
      agent_tails[a] = tail_fraction(densities[i][a], calib.tau_tail);
    }
    team_means[i] = aggregate(agent_means, config.agg);
    team_tails[i] = aggregate(agent_tails, config.agg);
    if (mode == DetectionMode::competitive)
      dcrs.push_back(density_change_rate(densities[i], config.agg));
  }
  calib.mu_bds = mean(team_means);
  calib.sigma_bds = population_stddev(team_means);
  calib.mu_tail = mean(team_tails);
  calib.sigma_tail = population_stddev(team_tails);
  if (!dcrs.empty()) {
    calib.mu_dcr = mean(dcrs);
    calib.sigma_dcr = population_stddev(dcrs);
  }

  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<double> dcr;
    if (mode == DetectionMode::competitive) dcr = dcrs[i];
    scores[i] = detail::make_report(team_means[i], team_tails[i], dcr, calib).score;
  }
  calib.tau = percentile(scores, config.score_quantile);
  return calib;
}

}  // namespace driftguard
