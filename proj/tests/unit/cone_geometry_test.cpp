#include "relupgd/cone_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "relupgd/error.hpp"
#include "relupgd/rng.hpp"

namespace relupgd {
namespace {

// dist^2 from g to the l1 polar, by dense minimization over t of the same objective.
double l1_polar_grid(const DescentConeDescriptor& cone, const std::vector<double>& g) {
  std::vector<bool> on(cone.d(), false);
  for (std::size_t i : cone.support) on[i] = true;
  const auto objective = [&](double t) {
    double acc = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < cone.d(); ++i) {
      if (on[i]) {
        const double r = g[i] - t * cone.signs[k++];
        acc += r * r;
      } else {
        const double r = std::max(0.0, std::abs(g[i]) - t);
        acc += r * r;
      }
    }
    return acc;
  };
  return oracle::grid_minimum(objective, 0.0, 12.0);
}

TEST(PhiGamma, Examples) {
  EXPECT_NEAR(phi_gamma(1.0), std::sqrt(2.0 / std::numbers::pi), 1e-12);
  EXPECT_NEAR(phi_gamma(1.0), 0.7978845608, 1e-10);
  EXPECT_NEAR(phi_gamma(2.0), std::sqrt(std::numbers::pi / 2.0), 1e-12);
  EXPECT_NEAR(phi_gamma(2.0), 1.2533141373, 1e-10);
  EXPECT_NEAR(phi_gamma(400.0) / 20.0, 1.0, 0.002);
  EXPECT_THROW(phi_gamma(0.0), Error);
  EXPECT_THROW(phi_gamma(-1.0), Error);
  try {
    phi_gamma(0.0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonpositiveArgument);
  }
}

TEST(PhiGamma, SquareBracketedByDegreesOfFreedom) {
  for (double t : {1.0, 2.0, 5.0, 10.0, 100.0}) {
    const double sq = phi_gamma(t) * phi_gamma(t);
    EXPECT_GT(sq, t - 1.0);
    EXPECT_LT(sq, t);
  }
}

TEST(WidthAnalyticL1, FullSupportIsDimension) {
  EXPECT_EQ(width_analytic_l1(7, 7), 7.0);
  EXPECT_EQ(width_analytic_l1(1, 1), 1.0);
  EXPECT_THROW(width_analytic_l1(5, 0), Error);
  EXPECT_THROW(width_analytic_l1(5, 6), Error);
}

TEST(WidthAnalyticL1, MatchesQuadratureOracle) {
  // Objective rebuilt from a Simpson-rule expectation, minimized on a refined grid.
  const auto objective = [](double t) { return 1.0 * (1.0 + t * t) + 1.0 * oracle::excess_quadrature(t); };
  EXPECT_NEAR(width_analytic_l1(2, 1), oracle::grid_minimum(objective), 1e-6);
  // Independent reference (scipy quad + bounded Brent).
  EXPECT_NEAR(width_analytic_l1(2, 1), 1.6625998114129124, 1e-6);
}

TEST(WidthAnalyticL1, DualMethodFixture) {
  const double ternary = width_analytic_l1(100, 5);
  const double grid = oracle::grid_minimum([](double t) { return l1_width_objective(100, 5, t); });
  EXPECT_NEAR(ternary, grid, 1e-6);
  EXPECT_NEAR(ternary, 20.389985632964, 1e-6);
  EXPECT_NEAR(width_analytic_l1(200, 10), 40.779971265928, 1e-6);
}

TEST(WidthAnalyticL1, Monotone) {
  for (std::size_t d : {10u, 50u, 200u}) {
    double previous = 0.0;
    for (std::size_t s = 1; s <= d; s += std::max<std::size_t>(1, d / 10)) {
      const double v = width_analytic_l1(d, s);
      EXPECT_GE(v, previous - 1e-9);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, static_cast<double>(d) + 1e-9);
      previous = v;
    }
  }
  for (std::size_t s : {1u, 5u}) {
    double previous = 0.0;
    for (std::size_t d = s; d <= 400; d += 13) {
      const double v = width_analytic_l1(d, s);
      EXPECT_GE(v, previous - 1e-9);
      previous = v;
    }
  }
}

TEST(PolarDistance, L1MatchesGridOracle) {
  StreamRng rng(2, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + rng.below(10);
    const std::size_t s = 1 + rng.below(d);
    std::vector<double> anchor(d, 0.0);
    for (std::size_t i = 0; i < s; ++i) anchor[i] = rng.sign() * (0.5 + rng.uniform());
    const auto cone = DescentConeDescriptor::at(ConeKind::kL1, WeightVector(anchor));
    std::vector<double> g(d);
    for (double& v : g) v = rng.normal();
    EXPECT_NEAR(polar_distance_sq(cone, g), l1_polar_grid(cone, g), 1e-8);
  }
}

TEST(PolarDistance, SimpleCones) {
  const std::vector<double> g = {1.0, -2.0, 3.0};
  EXPECT_DOUBLE_EQ(polar_distance_sq(DescentConeDescriptor::canonical(ConeKind::kFullSpace, 3, 3), g), 14.0);
  EXPECT_DOUBLE_EQ(polar_distance_sq(DescentConeDescriptor::at(ConeKind::kSubspace, WeightVector({0.0, 1.0, 1.0})), g), 13.0);
  EXPECT_THROW(polar_distance_sq(DescentConeDescriptor::canonical(ConeKind::kL2, 3, 1), g), Error);
}

TEST(EstimateWidthMc, SubspaceIsDimension) {
  for (std::size_t k : {1u, 3u, 8u}) {
    const auto est = estimate_width_mc(DescentConeDescriptor::canonical(ConeKind::kSubspace, 20, k), 20000, 5);
    EXPECT_LE(std::abs(est.omega_sq_mc - static_cast<double>(k)), std::max(3.0 * est.stderr_mc, 1.0));
    EXPECT_GT(est.stderr_mc, 0.0);
    ASSERT_TRUE(est.omega_sq_analytic.has_value());
    EXPECT_EQ(*est.omega_sq_analytic, static_cast<double>(k));
  }
}

TEST(EstimateWidthMc, FullSpaceIsDimension) {
  const auto est = estimate_width_mc(DescentConeDescriptor::canonical(ConeKind::kFullSpace, 12, 12), 20000, 1);
  EXPECT_LE(std::abs(est.omega_sq_mc - 12.0), 3.0 * est.stderr_mc);
  EXPECT_LE(est.n0, 12.0);
}

TEST(EstimateWidthMc, L1InTwoDimensionsMatchesGridEstimate) {
  const auto cone = DescentConeDescriptor::at(ConeKind::kL1, WeightVector({0.0, -1.0}));
  const std::size_t samples = 2000;
  const auto est = estimate_width_mc(cone, samples, 9);
  double sum = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    StreamRng rng(9, k);
    std::vector<double> g(2);
    for (double& v : g) v = rng.normal();
    sum += l1_polar_grid(cone, g);
  }
  EXPECT_LE(std::abs(est.omega_sq_mc - sum / samples), 3.0 * est.stderr_mc);
  EXPECT_NEAR(est.omega_sq_mc, sum / samples, 1e-6);
}

TEST(EstimateWidthMc, L1AgreesWithAnalytic) {
  const auto cone = DescentConeDescriptor::canonical(ConeKind::kL1, 100, 5);
  const auto est = estimate_width_mc(cone, 20000, 3);
  ASSERT_TRUE(est.omega_sq_analytic.has_value());
  EXPECT_LE(std::abs(est.omega_sq_mc - *est.omega_sq_analytic), std::max(3.0 * est.stderr_mc, 1.0));
}

TEST(EstimateWidthMc, ReproducibleAndValidated) {
  const auto cone = DescentConeDescriptor::canonical(ConeKind::kL1, 30, 3);
  EXPECT_EQ(estimate_width_mc(cone, 500, 4).omega_sq_mc, estimate_width_mc(cone, 500, 4).omega_sq_mc);
  EXPECT_THROW(estimate_width_mc(cone, 99, 4), Error);
  try {
    estimate_width_mc(DescentConeDescriptor::canonical(ConeKind::kSparsity, 30, 3), 500, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedCone);
  }
}

TEST(MinimalSamples, Dispatch) {
  const auto full = DescentConeDescriptor::canonical(ConeKind::kFullSpace, 40, 40);
  EXPECT_EQ(minimal_samples(full, WidthMethod::kAuto), 40.0);
  EXPECT_EQ(minimal_samples(full, WidthMethod::kAnalytic), 40.0);
  const auto l1 = DescentConeDescriptor::canonical(ConeKind::kL1, 100, 5);
  EXPECT_EQ(minimal_samples(l1, WidthMethod::kAuto), width_analytic_l1(100, 5));
  EXPECT_EQ(minimal_samples(DescentConeDescriptor::canonical(ConeKind::kSparsity, 100, 5), WidthMethod::kAuto),
            width_analytic_l1(100, 5));
  EXPECT_EQ(minimal_samples(DescentConeDescriptor::canonical(ConeKind::kL2, 100, 5), WidthMethod::kMonteCarlo), 100.0);
  EXPECT_EQ(minimal_samples(DescentConeDescriptor::canonical(ConeKind::kSubspace, 100, 5), WidthMethod::kAuto), 5.0);
  const double mc = minimal_samples(l1, WidthMethod::kMonteCarlo, 1);
  EXPECT_NEAR(mc, width_analytic_l1(100, 5), 1.0);
  EXPECT_THROW(DescentConeDescriptor::at(ConeKind::kL1, WeightVector::zeros(4)), Error);
}

TEST(MinimalSamples, SparsityProxyMonotoneInS) {
  double previous = 0.0;
  for (std::size_t s = 1; s <= 50; ++s) {
    const double v = minimal_samples(DescentConeDescriptor::canonical(ConeKind::kSparsity, 50, s), WidthMethod::kAuto);
    EXPECT_GE(v, previous);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 50.0);
    previous = v;
  }
}

}  // namespace
}  // namespace relupgd
