#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftguard/errors.hpp"
#include "driftguard/stats.hpp"

namespace driftguard {

inline constexpr double kDefaultEpsilon = 1e-8;
inline constexpr double kProbSumTolerance = 1e-9;

// Probability vector over K discrete actions. Immutable once constructed;
// construction validates non-negativity and normalization.
class ActionDistribution {
public:
  explicit ActionDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw DimensionError("action distribution needs K >= 1");
    double sum = 0.0;
    for (double p : probs_) {
      if (!std::isfinite(p)) throw NumericError("non-finite action probability");
      if (p < 0.0) throw DomainError("negative action probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance)
      throw DomainError("action probabilities sum to " + std::to_string(sum));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  const std::vector<double>& probs() const { return probs_; }

  std::size_t argmax() const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs_.size(); ++k)
      if (probs_[k] > probs_[best]) best = k;
    return best;
  }

private:
  std::vector<double> probs_;
};

// Per-action benign statistics (mu_k, sigma_k) with a stability floor.
class ActionBaseline {
public:
  ActionBaseline(std::vector<double> mu, std::vector<double> sigma, double epsilon,
                 std::size_t sample_count)
      : mu_(std::move(mu)), sigma_(std::move(sigma)), epsilon_(epsilon),
        sample_count_(sample_count) {
    if (mu_.empty() || mu_.size() != sigma_.size())
      throw DimensionError("baseline mu/sigma lengths differ");
    if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_))
      throw DomainError("baseline epsilon must be positive");
    if (sample_count_ < 2) throw InsufficientDataError("baseline needs >= 2 samples");
    for (std::size_t k = 0; k < mu_.size(); ++k) {
      if (!std::isfinite(mu_[k]) || !std::isfinite(sigma_[k]))
        throw NumericError("non-finite baseline statistic");
      if (mu_[k] < 0.0 || mu_[k] > 1.0) throw DomainError("baseline mean outside [0, 1]");
      if (sigma_[k] < 0.0) throw DomainError("negative baseline stddev");
    }
  }

  std::size_t size() const { return mu_.size(); }
  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& sigma() const { return sigma_; }
  double epsilon() const { return epsilon_; }
  std::size_t sample_count() const { return sample_count_; }

private:
  std::vector<double> mu_;
  std::vector<double> sigma_;
  double epsilon_;
  std::size_t sample_count_;
};

// Per-step drift scores of one trajectory.
struct DriftTrace {
  std::vector<double> scores;
  std::optional<int> agent_id;
};

// Periodic table of representative benign actions, indexed modulo its period.
class ReferenceActionTable {
public:
  explicit ReferenceActionTable(std::vector<int> actions) : actions_(std::move(actions)) {
    if (actions_.empty()) throw DimensionError("reference table needs period >= 1");
    for (int a : actions_)
      if (a < 0) throw DomainError("negative action id in reference table");
  }

  std::size_t period() const { return actions_.size(); }
  const std::vector<int>& actions() const { return actions_; }

private:
  std::vector<int> actions_;
};

// Per-step drift score: half the sum of squared standardized deviations of the
// action distribution from the benign baseline.
inline double compute_bds(const ActionDistribution& dist, const ActionBaseline& baseline) {
  if (dist.size() != baseline.size())
    throw DimensionError("distribution has " + std::to_string(dist.size()) +
                         " actions, baseline has " + std::to_string(baseline.size()));
  double sum = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const double z = (dist[k] - baseline.mu()[k]) / (baseline.sigma()[k] + baseline.epsilon());
    sum += z * z;
  }
  return 0.5 * sum;
}

// Pooled per-action mean and population stddev over every step of every clean
// trace. Statistics are time-invariant: indexed by action only.
inline ActionBaseline calibrate_action_baseline(
    std::span<const std::vector<ActionDistribution>> clean_traces,
    double epsilon = kDefaultEpsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  std::size_t k_actions = 0;
  std::size_t steps = 0;
  for (const auto& trace : clean_traces) {
    for (const auto& dist : trace) {
      if (k_actions == 0) k_actions = dist.size();
      if (dist.size() != k_actions)
        throw DimensionError("traces disagree on action count");
      ++steps;
    }
  }
  if (steps < 2) throw InsufficientDataError("baseline calibration needs >= 2 pooled steps");

  std::vector<double> mu(k_actions, 0.0);
  for (const auto& trace : clean_traces)
    for (const auto& dist : trace)
      for (std::size_t k = 0; k < k_actions; ++k) mu[k] += dist[k];
  for (auto& m : mu) m /= static_cast<double>(steps);

  std::vector<double> sigma(k_actions, 0.0);
  for (const auto& trace : clean_traces)
    for (const auto& dist : trace)
      for (std::size_t k = 0; k < k_actions; ++k) {
        const double d = dist[k] - mu[k];
        sigma[k] += d * d;
      }
  for (auto& s : sigma) s = std::sqrt(s / static_cast<double>(steps));

  return ActionBaseline(std::move(mu), std::move(sigma), epsilon, steps);
}

// Representative action per timestep: the mode of the actions chosen at that
// step across clean traces, ties broken toward the smallest action id. The
// period is the longest clean trace; shorter traces vote only on the steps
// they cover.
inline ReferenceActionTable build_reference_table(
    std::span<const std::vector<int>> clean_action_traces, int num_actions) {
  if (clean_action_traces.empty())
    throw InsufficientDataError("reference table needs >= 1 trace");
  if (num_actions < 1) throw DomainError("num_actions must be >= 1");
  std::size_t period = 0;
  for (const auto& trace : clean_action_traces) {
    if (trace.empty()) throw InsufficientDataError("empty action trace");
    for (int a : trace)
      if (a < 0 || a >= num_actions)
        throw DomainError("action id " + std::to_string(a) + " outside [0, " +
                          std::to_string(num_actions) + ")");
    period = std::max(period, trace.size());
  }

  std::vector<int> actions(period, 0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_actions));
  for (std::size_t t = 0; t < period; ++t) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& trace : clean_action_traces)
      if (t < trace.size()) ++counts[static_cast<std::size_t>(trace[t])];
    std::size_t best = 0;
    for (std::size_t a = 1; a < counts.size(); ++a)
      if (counts[a] > counts[best]) best = a;  // ties keep the smaller id
    actions[t] = static_cast<int>(best);
  }
  return ReferenceActionTable(std::move(actions));
}

inline int reference_action(const ReferenceActionTable& table, std::size_t t) {
  return table.actions()[t % table.period()];
}

}  // namespace driftguard
