#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "driftguard/density.hpp"
#include "driftguard/rng.hpp"

using namespace driftguard;

namespace {

// Naive double-loop Gaussian sum, the oracle for the KDE path.
double kde_oracle(const std::vector<double>& samples, double h, double x) {
  double sum = 0.0;
  for (double s : samples) {
    const double u = (x - s) / h;
    sum += std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
  }
  return sum / (static_cast<double>(samples.size()) * h);
}

}  // namespace

TEST_CASE("silverman bandwidth degenerate and hand cases", "[density]") {
  std::vector<double> constant = {3.0, 3.0, 3.0};
  REQUIRE(silverman_bandwidth(constant) == 1e-3);
  std::vector<double> single = {5.0};
  REQUIRE(silverman_bandwidth(single) == 1e-3);

  std::vector<double> two = {0.0, 2.0};  // population stddev 1
  REQUIRE(silverman_bandwidth(two) ==
          Catch::Approx(1.06 * std::pow(2.0, -0.2)).margin(1e-12));
  REQUIRE(silverman_bandwidth(two) == Catch::Approx(0.9228).margin(1e-3));

  REQUIRE_THROWS_AS(silverman_bandwidth({}), InsufficientDataError);
}

TEST_CASE("silverman bandwidth is scale equivariant", "[density]") {
  std::vector<double> base = {0.0, 1.0, 3.0, 4.5};
  std::vector<double> doubled;
  for (double v : base) doubled.push_back(2.0 * v);
  REQUIRE(silverman_bandwidth(doubled) ==
          Catch::Approx(2.0 * silverman_bandwidth(base)).margin(1e-12));
}

TEST_CASE("kde density closed-form single kernel", "[density]") {
  KdeModel model({0.0}, 1.0);
  REQUIRE(kde_density(model, 0.0) == Catch::Approx(1.0 / std::sqrt(2.0 * M_PI)).margin(1e-15));
  REQUIRE(kde_density(model, 0.0) == Catch::Approx(0.398942).margin(1e-6));
}

TEST_CASE("kde density symmetric two-kernel case", "[density]") {
  KdeModel model({0.0, 2.0}, 1.0);
  const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * M_PI);
  REQUIRE(kde_density(model, 1.0) == Catch::Approx(phi1).margin(1e-15));
  REQUIRE(kde_density(model, 1.0) == Catch::Approx(0.241971).margin(1e-6));
}

TEST_CASE("kde density equals the brute-force oracle", "[density]") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(64);
    std::vector<double> samples(n);
    for (auto& s : samples) s = 10.0 * rng.uniform01() - 5.0;
    const double h = 0.05 + rng.uniform01();
    const double x = 12.0 * rng.uniform01() - 6.0;
    KdeModel model(samples, h);
    REQUIRE(kde_density(model, x) == Catch::Approx(kde_oracle(samples, h, x)).margin(1e-12));
  }
}

TEST_CASE("kde density integrates to one", "[density]") {
  Rng rng(11);
  std::vector<double> samples(40);
  for (auto& s : samples) s = 3.0 * rng.uniform01();
  const double h = silverman_bandwidth(samples);
  KdeModel model(samples, h);
  const double lo = *std::min_element(samples.begin(), samples.end()) - 6.0 * h;
  const double hi = *std::max_element(samples.begin(), samples.end()) + 6.0 * h;
  const int n = 10000;
  const double dx = (hi - lo) / n;
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    integral += w * kde_density(model, lo + i * dx) * dx;
  }
  REQUIRE(integral == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("kde density is reflection symmetric", "[density]") {
  Rng rng(13);
  std::vector<double> samples(16);
  for (auto& s : samples) s = 4.0 * rng.uniform01();
  const double pivot = 1.7;
  std::vector<double> reflected;
  for (double s : samples) reflected.push_back(2.0 * pivot - s);
  KdeModel model(samples, 0.4);
  KdeModel mirror(reflected, 0.4);
  for (int i = 0; i < 50; ++i) {
    const double x = 8.0 * rng.uniform01() - 2.0;
    REQUIRE(kde_density(model, x) ==
            Catch::Approx(kde_density(mirror, 2.0 * pivot - x)).margin(1e-12));
  }
}

TEST_CASE("kde density rejects non-finite input", "[density]") {
  KdeModel model({0.0}, 1.0);
  REQUIRE_THROWS_AS(kde_density(model, std::nan("")), NumericError);
  REQUIRE_THROWS_AS(KdeModel({std::nan("")}, 1.0), NumericError);
  REQUIRE_THROWS_AS(KdeModel({0.0}, 0.0), DomainError);
}

TEST_CASE("tail fraction counts strict low-density steps", "[density]") {
  std::vector<double> densities = {0.5, 0.6, 0.7};
  REQUIRE(tail_fraction(densities, 0.5) == 0.0);  // strict inequality
  std::vector<double> half = {0.1, 0.2, 0.8, 0.9};
  REQUIRE(tail_fraction(half, 0.5) == 0.5);
  REQUIRE_THROWS_AS(tail_fraction({}, 0.5), InsufficientDataError);
}

TEST_CASE("tail fraction is monotone in the threshold", "[density]") {
  Rng rng(5);
  std::vector<double> densities(64);
  for (auto& d : densities) d = rng.uniform01();
  double prev = 0.0;
  for (double tau = 0.0; tau <= 1.2; tau += 0.05) {
    const double frac = tail_fraction(densities, tau);
    REQUIRE(frac >= prev);
    REQUIRE(frac >= 0.0);
    REQUIRE(frac <= 1.0);
    prev = frac;
  }
}

TEST_CASE("density change rate hand cases", "[density]") {
  std::vector<std::vector<double>> constant = {{0.3, 0.3, 0.3}, {0.9, 0.9, 0.9}};
  REQUIRE(density_change_rate(constant, Agg::mean) == 0.0);

  std::vector<std::vector<double>> two = {{0.1, 0.3}, {0.2, 0.2}};
  REQUIRE(density_change_rate(two, Agg::mean) == Catch::Approx(0.1).margin(1e-15));

  std::vector<std::vector<double>> single = {{0.1, 0.5, 0.2}};
  REQUIRE(density_change_rate(single, Agg::mean) ==
          Catch::Approx(density_change_rate(single, Agg::max)).margin(1e-15));
  REQUIRE(density_change_rate(single, Agg::mean) == Catch::Approx(0.35).margin(1e-15));
}

TEST_CASE("density change rate ignores constant offsets", "[density]") {
  Rng rng(3);
  std::vector<std::vector<double>> sequences(3, std::vector<double>(20));
  for (auto& seq : sequences)
    for (auto& v : seq) v = rng.uniform01();
  std::vector<std::vector<double>> shifted = sequences;
  for (auto& seq : shifted)
    for (auto& v : seq) v += 2.5;
  REQUIRE(density_change_rate(sequences, Agg::mean) ==
          Catch::Approx(density_change_rate(shifted, Agg::mean)).margin(1e-12));
}

TEST_CASE("density change rate error paths", "[density]") {
  std::vector<std::vector<double>> short_seq = {{0.1}};
  REQUIRE_THROWS_AS(density_change_rate(short_seq, Agg::mean), InsufficientDataError);
  std::vector<std::vector<double>> ragged = {{0.1, 0.2}, {0.1, 0.2, 0.3}};
  REQUIRE_THROWS_AS(density_change_rate(ragged, Agg::mean), DimensionError);
}

TEST_CASE("self densities match per-point evaluation", "[density]") {
  std::vector<double> values = {0.2, 0.9, 1.4, 0.2, 3.0};
  const auto densities = self_densities(values);
  KdeModel model(values, silverman_bandwidth(values));
  for (std::size_t i = 0; i < values.size(); ++i)
    REQUIRE(densities[i] == kde_density(model, values[i]));
}
