#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "driftguard/errors.hpp"
#include "driftguard/stats.hpp"

namespace driftguard {

inline constexpr double kInvSqrt2Pi = 0.3989422804014327;
inline constexpr double kBandwidthFloor = 1e-3;

// Gaussian-kernel density model over a set of 1-D samples.
class KdeModel {
public:
  KdeModel(std::vector<double> samples, double bandwidth)
      : samples_(std::move(samples)), bandwidth_(bandwidth) {
    if (samples_.empty()) throw InsufficientDataError("KDE needs >= 1 sample");
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
      throw DomainError("KDE bandwidth must be positive");
    for (double s : samples_)
      if (!std::isfinite(s)) throw NumericError("non-finite KDE sample");
  }

  const std::vector<double>& samples() const { return samples_; }
  double bandwidth() const { return bandwidth_; }

private:
  std::vector<double> samples_;
  double bandwidth_;
};

// Rule-of-thumb bandwidth h = 1.06 * s * N^(-1/5) with s the population
// stddev; degenerate spread falls back to a fixed floor.
inline double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw InsufficientDataError("bandwidth of empty sample set");
  const double s = population_stddev(samples);
  if (s == 0.0) return kBandwidthFloor;
  return 1.06 * s * std::pow(static_cast<double>(samples.size()), -0.2);
}

// Either the rule above or a fixed caller-chosen bandwidth.
struct BandwidthPolicy {
  double fixed = 0.0;  // <= 0 means use the Silverman rule

  double resolve(std::span<const double> samples) const {
    if (fixed > 0.0) return fixed;
    return silverman_bandwidth(samples);
  }
};

inline double kde_density(const KdeModel& model, double x) {
  if (!std::isfinite(x)) throw NumericError("non-finite KDE evaluation point");
  const double h = model.bandwidth();
  double sum = 0.0;
  for (double s : model.samples()) {
    const double u = (x - s) / h;
    sum += std::exp(-0.5 * u * u) * kInvSqrt2Pi;
  }
  return sum / (static_cast<double>(model.samples().size()) * h);
}

// Density of each trace value estimated from the trace's own samples.
inline std::vector<double> self_densities(std::span<const double> values,
                                          const BandwidthPolicy& policy = {}) {
  if (values.empty()) throw InsufficientDataError("self-KDE of empty trace");
  KdeModel model(std::vector<double>(values.begin(), values.end()), policy.resolve(values));
  std::vector<double> densities;
  densities.reserve(values.size());
  for (double v : values) densities.push_back(kde_density(model, v));
  return densities;
}

// Fraction of steps whose density falls strictly below the tail threshold.
inline double tail_fraction(std::span<const double> densities, double tau_tail) {
  if (densities.empty()) throw InsufficientDataError("tail fraction of empty range");
  std::size_t below = 0;
  for (double d : densities)
    if (d < tau_tail) ++below;
  return static_cast<double>(below) / static_cast<double>(densities.size());
}

// Mean over time of the cross-agent aggregated absolute step-to-step density
// change. The competitive-MARL instability signal.
inline double density_change_rate(
    std::span<const std::vector<double>> per_agent_density_sequences, Agg agg) {
  if (per_agent_density_sequences.empty())
    throw InsufficientDataError("density change rate needs >= 1 agent");
  const std::size_t steps = per_agent_density_sequences.front().size();
  if (steps < 2) throw InsufficientDataError("density change rate needs >= 2 steps");
  for (const auto& seq : per_agent_density_sequences)
    if (seq.size() != steps) throw DimensionError("ragged density sequences");

  const std::size_t n_agents = per_agent_density_sequences.size();
  std::vector<double> deltas(n_agents);
  double total = 0.0;
  for (std::size_t t = 1; t < steps; ++t) {
    for (std::size_t i = 0; i < n_agents; ++i)
      deltas[i] = std::abs(per_agent_density_sequences[i][t] -
                           per_agent_density_sequences[i][t - 1]);
    total += aggregate(deltas, agg);
  }
  return total / static_cast<double>(steps - 1);
}

}  // namespace driftguard
