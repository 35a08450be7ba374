#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "driftguard/errors.hpp"

namespace driftguard {

inline double mean(std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("mean of empty range");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Population (biased) standard deviation, two-pass.
inline double population_stddev(std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("stddev of empty range");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

// Percentile with linear interpolation between order statistics
// (the inclusive convention: rank = q * (n - 1)). q in [0, 1].
inline double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw InsufficientDataError("percentile of empty range");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("percentile q outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Cross-agent aggregation operator.
enum class Agg { mean, max };

inline double aggregate(std::span<const double> values, Agg agg) {
  if (values.empty()) throw InsufficientDataError("aggregate of empty range");
  if (agg == Agg::max) return *std::max_element(values.begin(), values.end());
  return mean(values);
}

inline std::string agg_name(Agg agg) { return agg == Agg::max ? "max" : "mean"; }

inline Agg agg_from_name(const std::string& name) {
  if (name == "mean") return Agg::mean;
  if (name == "max") return Agg::max;
  throw DomainError("unknown aggregation \"" + name + "\"");
}

// Deployment setting: single-agent, cooperative team, or competitive match.
enum class DetectionMode { single_agent, cooperative, competitive };

inline std::string mode_name(DetectionMode mode) {
  switch (mode) {
    case DetectionMode::single_agent: return "sarl";
    case DetectionMode::cooperative: return "coo";
    case DetectionMode::competitive: return "com";
  }
  throw DomainError("unknown detection mode");
}

inline DetectionMode mode_from_name(const std::string& name) {
  if (name == "sarl") return DetectionMode::single_agent;
  if (name == "coo") return DetectionMode::cooperative;
  if (name == "com") return DetectionMode::competitive;
  throw DomainError("unknown detection mode \"" + name + "\"");
}

}  // namespace driftguard
