#include "relupgd/constraint_projections.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "relupgd/error.hpp"
#include "relupgd/rng.hpp"

namespace relupgd {
namespace {

WeightVector random_vector(std::size_t d, StreamRng& rng, double scale) {
  WeightVector v = WeightVector::zeros(d);
  for (double& x : v.view()) x = scale * rng.normal();
  return v;
}

void expect_vec_near(const WeightVector& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.dim(), b.size());
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

TEST(Project, MembersAreFixed) {
  const WeightVector v({0.3, -0.2, 0.1});
  EXPECT_EQ(project(ConstraintSet::l1_ball(1.0), v), v);
  EXPECT_EQ(project(ConstraintSet::l2_ball(1.0), v), v);
  EXPECT_EQ(project(ConstraintSet::sparsity(3), v), v);
  EXPECT_EQ(project(ConstraintSet::unconstrained(), v), v);
}

TEST(Project, L1Examples) {
  const auto ball = ConstraintSet::l1_ball(2.0);
  expect_vec_near(project(ball, WeightVector({3.0, 1.0})), {2.0, 0.0}, 1e-15);
  expect_vec_near(project(ball, WeightVector({2.0, 2.0})), {1.0, 1.0}, 1e-15);
  expect_vec_near(project(ball, WeightVector({-3.0, 1.0})), {-2.0, 0.0}, 1e-15);
  for (const auto& v : {WeightVector({3.0, 1.0}), WeightVector({2.0, 2.0})}) {
    const auto grid = oracle::l1_projection_grid(v.entries(), 2.0, 0.01);
    expect_vec_near(project(ball, v), grid, 0.01);
  }
}

TEST(Project, SparsityExampleAndTies) {
  expect_vec_near(project(ConstraintSet::sparsity(2), WeightVector({3.0, -1.0, 2.0})), {3.0, 0.0, 2.0}, 0.0);
  const auto brute = oracle::sparsity_projection_exhaustive({3.0, -1.0, 2.0}, 2);
  EXPECT_EQ(brute.point, (std::vector<double>{3.0, 0.0, 2.0}));
  // Equal magnitudes: the lowest indices win.
  expect_vec_near(project(ConstraintSet::sparsity(2), WeightVector({1.0, -1.0, 1.0, 0.5})), {1.0, -1.0, 0.0, 0.0}, 0.0);
}

TEST(Project, L2RadialShrinkAndZero) {
  expect_vec_near(project(ConstraintSet::l2_ball(5.0), WeightVector({6.0, 8.0})), {3.0, 4.0}, 1e-15);
  EXPECT_EQ(project(ConstraintSet::l2_ball(1.0), WeightVector::zeros(3)), WeightVector::zeros(3));
  EXPECT_EQ(project(ConstraintSet::l1_ball(1.0), WeightVector::zeros(3)), WeightVector::zeros(3));
}

TEST(Project, InvalidParameters) {
  EXPECT_THROW(ConstraintSet::l1_ball(0.0), Error);
  EXPECT_THROW(ConstraintSet::l2_ball(-1.0), Error);
  EXPECT_THROW(ConstraintSet::sparsity(0), Error);
  EXPECT_THROW(project(ConstraintSet::sparsity(4), WeightVector({1.0, 2.0})), Error);
  EXPECT_THROW(project(ConstraintSet::l1_ball(1.0), WeightVector({NAN, 1.0})), Error);
}

TEST(Project, IdempotentAndFeasible) {
  StreamRng rng(5, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng.below(12);
    const auto v = random_vector(d, rng, 3.0);
    const std::vector<ConstraintSet> sets = {ConstraintSet::l1_ball(0.5 + rng.uniform()),
                                             ConstraintSet::l2_ball(0.5 + rng.uniform()),
                                             ConstraintSet::sparsity(1 + rng.below(d))};
    for (const auto& set : sets) {
      const auto p = project(set, v);
      EXPECT_TRUE(set.contains(p, 1e-9));
      const auto pp = project(set, p);
      for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(pp[i], p[i], 1e-12);
    }
  }
}

TEST(Project, OptimalAgainstFeasiblePoints) {
  StreamRng rng(6, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng.below(8);
    const double radius = 0.3 + rng.uniform();
    const auto v = random_vector(d, rng, 2.0);
    for (const auto& set : {ConstraintSet::l1_ball(radius), ConstraintSet::l2_ball(radius)}) {
      const auto p = project(set, v);
      // A random feasible point: project a random vector, then shrink towards 0.
      auto z = project(set, random_vector(d, rng, 2.0));
      const double shrink = rng.uniform();
      for (double& x : z.view()) x *= shrink;
      EXPECT_LE(distance(v.view(), p.view()), distance(v.view(), z.view()) + 1e-9);
    }
  }
}

TEST(Project, NonexpansiveForConvexKinds) {
  StreamRng rng(7, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng.below(10);
    const auto u = random_vector(d, rng, 2.0);
    const auto v = random_vector(d, rng, 2.0);
    for (const auto& set : {ConstraintSet::l1_ball(1.0), ConstraintSet::l2_ball(1.0), ConstraintSet::unconstrained()}) {
      EXPECT_LE(distance(project(set, u).view(), project(set, v).view()), distance(u.view(), v.view()) + 1e-12);
    }
  }
}

TEST(Project, SparsityMatchesExhaustiveSearch) {
  StreamRng rng(8, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 1 + rng.below(6);
    const std::size_t k = 1 + rng.below(d);
    const auto v = random_vector(d, rng, 1.0);
    const auto brute = oracle::sparsity_projection_exhaustive(v.entries(), k);
    const auto p = project(ConstraintSet::sparsity(k), v);
    EXPECT_EQ(p.entries(), brute.point);
  }
}

TEST(Project, L1WithinGridResolutionOfBruteForce) {
  StreamRng rng(9, 0);
  const double step = 0.05;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.below(4);
    const auto v = random_vector(d, rng, 1.5);
    const auto grid = oracle::l1_projection_grid(v.entries(), 1.0, step);
    const auto p = project(ConstraintSet::l1_ball(1.0), v);
    const double exact = std::sqrt(oracle::sq_dist(v.entries(), p.entries()));
    const double best = std::sqrt(oracle::sq_dist(v.entries(), grid));
    EXPECT_LE(exact, best + 1e-12);
    EXPECT_LE(best - exact, step * std::sqrt(static_cast<double>(d)));
  }
}

TEST(NaturalRadius, Examples) {
  const auto l1 = natural_radius(ConstraintKind::kL1Ball, WeightVector({1.0, -1.0, 0.0}));
  EXPECT_EQ(l1.kind(), ConstraintKind::kL1Ball);
  EXPECT_DOUBLE_EQ(l1.radius(), 2.0);
  EXPECT_DOUBLE_EQ(natural_radius(ConstraintKind::kL2Ball, WeightVector({3.0, 4.0})).radius(), 5.0);
  std::vector<double> entries(30, 0.0);
  for (std::size_t i = 0; i < 10; ++i) entries[3 * i] = 1.0 + static_cast<double>(i);
  EXPECT_EQ(natural_radius(ConstraintKind::kSparsity, WeightVector(entries)).k(), 10u);
  try {
    natural_radius(ConstraintKind::kL1Ball, WeightVector::zeros(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
  }
}

TEST(ConstraintSpec, ParsingAndResolution) {
  EXPECT_EQ(parse_constraint_kind("l1"), ConstraintKind::kL1Ball);
  EXPECT_EQ(parse_constraint_kind("none"), ConstraintKind::kUnconstrained);
  EXPECT_THROW(parse_constraint_kind("linf"), Error);
  const ConstraintSpec automatic{ConstraintKind::kL1Ball, std::nullopt, 0};
  EXPECT_DOUBLE_EQ(automatic.resolve(WeightVector({1.0, -2.0})).radius(), 3.0);
  EXPECT_THROW(automatic.resolve(std::nullopt), Error);
  const ConstraintSpec fixed{ConstraintKind::kL2Ball, 0.5, 0};
  EXPECT_DOUBLE_EQ(fixed.resolve(std::nullopt).radius(), 0.5);
}

}  // namespace
}  // namespace relupgd
