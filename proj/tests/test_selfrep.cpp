#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "exsel/dataset.hpp"
#include "exsel/selfrep.hpp"
#include "oracles.hpp"

using namespace exsel;

namespace {

DataMatrix random_sphere_data(Index dim, Index n, std::uint64_t seed) {
  CounterRng rng(seed);
  return DataMatrix(oracle::random_unit_columns(dim, n, rng));
}

}  // namespace

TEST(FCost, EmptySetIsHalfLambda) {
  const DataMatrix d = random_sphere_data(4, 6, 1);
  const std::vector<Index> none;
  EXPECT_EQ(f_cost(d.point(2), none, d, 150.0), 75.0);
}

TEST(FCost, MemberAttainsLowerBound) {
  const DataMatrix d = random_sphere_data(4, 6, 2);
  const std::vector<Index> set{1, 3, 4};
  EXPECT_NEAR(f_cost(d.point(3), set, d, 15.0), 1.0 - 1.0 / 30.0, 1e-6);
}

TEST(FCost, NegatedMemberAttainsLowerBound) {
  CounterRng rng(3);
  Matrix pts = oracle::random_unit_columns(4, 5, rng);
  pts.col(4) = -pts.col(0);
  const DataMatrix d(pts);
  const std::vector<Index> set{0, 2};
  EXPECT_NEAR(f_cost(d.point(4), set, d, 15.0), 1.0 - 1.0 / 30.0, 1e-6);
}

TEST(FCost, NonMemberStaysAboveLowerBound) {
  // Without +-x_j in the set the cost stays strictly above 1 - 1/(2 lambda),
  // by more than the solver tolerance.
  const DataMatrix d = random_sphere_data(5, 12, 4);
  const std::vector<Index> set{0, 1, 2, 3, 4, 5};
  for (Index j = 6; j < 12; ++j)
    EXPECT_GT(f_cost(d.point(j), set, d, 20.0), 1.0 - 1.0 / 40.0 + 1e-6);
}

TEST(FCost, RejectsSmallLambda) {
  const DataMatrix d = random_sphere_data(3, 3, 5);
  const std::vector<Index> set{0};
  EXPECT_THROW(f_cost(d.point(1), set, d, 1.0), Error);
}

TEST(FCostReport, FullSetGivesLowerBound) {
  const DataMatrix d = random_sphere_data(3, 9, 6);
  std::vector<Index> all(9);
  std::iota(all.begin(), all.end(), Index{0});
  const CostReport r = F_cost(all, d, 50.0);
  EXPECT_NEAR(r.sup_value, 1.0 - 1.0 / 100.0, 1e-6);
}

TEST(FCostReport, EmptySetTiesGoToIndexZero) {
  const DataMatrix d = random_sphere_data(3, 5, 7);
  const CostReport r = F_cost(std::vector<Index>{}, d, 12.0);
  EXPECT_EQ(r.sup_value, 6.0);
  EXPECT_EQ(r.argmax_index, 0);
}

TEST(FCostReport, SupIsExactMaxOfPerPoint) {
  const DataMatrix d = random_sphere_data(6, 25, 8);
  const std::vector<Index> set{3, 7, 11};
  const CostReport r = F_cost(set, d, 40.0);
  EXPECT_EQ(r.sup_value, r.per_point.maxCoeff());
  EXPECT_EQ(r.per_point(r.argmax_index), r.sup_value);
  for (Index j = 0; j < r.argmax_index; ++j) EXPECT_LT(r.per_point(j), r.sup_value);
  for (Index j = 0; j < d.count(); ++j)
    EXPECT_EQ(r.per_point(j), f_cost(d.point(j), set, d, 40.0));
}

TEST(FCostReport, ThreadCountDoesNotChangeResult) {
  const DataMatrix d = random_sphere_data(6, 40, 9);
  const std::vector<Index> set{0, 5, 9, 22};
  const CostReport a = F_cost(set, d, 70.0, {}, 1);
  const CostReport b = F_cost(set, d, 70.0, {}, 3);
  EXPECT_EQ(a.per_point, b.per_point);
  EXPECT_EQ(a.argmax_index, b.argmax_index);
}

TEST(Monotonicity, NestedSetsNeverIncreaseCosts) {
  CounterRng rng(10);
  for (int trial = 0; trial < 15; ++trial) {
    const Index dim = 3 + static_cast<Index>(rng.below(5));
    const Index n = 15 + static_cast<Index>(rng.below(15));
    const DataMatrix d(oracle::random_unit_columns(dim, n, rng));
    const double lambda = 2.0 + 300.0 * rng.uniform();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    CostReport previous = F_cost(std::vector<Index>{}, d, lambda);
    for (Index m = 1; m <= 8; ++m) {
      const std::vector<Index> set(order.begin(), order.begin() + m);
      const CostReport now = F_cost(set, d, lambda);
      EXPECT_LE(now.sup_value, previous.sup_value + 1e-6);
      for (Index j = 0; j < n; ++j) EXPECT_LE(now.per_point(j), previous.per_point(j) + 1e-6);
      previous = now;
    }
  }
}

TEST(LambdaThreshold, OrthogonalPairIsInfinite) {
  const DataMatrix d(Matrix::Identity(2, 2));
  EXPECT_TRUE(std::isinf(lambda_threshold(d)));
}

TEST(LambdaThreshold, AntipodalPairGivesOne) {
  CounterRng rng(11);
  Matrix pts = oracle::random_unit_columns(3, 4, rng);
  pts.col(2) = -pts.col(0);
  EXPECT_DOUBLE_EQ(lambda_threshold(DataMatrix(pts)), 1.0);
}

TEST(LambdaThreshold, BelowThresholdCostsAreFlat) {
  CounterRng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const DataMatrix d(oracle::random_unit_columns(8, 10, rng));
    const double threshold = lambda_threshold(d);
    // Coherence of 10 random points in R^8 keeps the threshold above 1.
    ASSERT_GT(threshold, 1.0);
    const double lambda = 1.0 + 0.9 * (threshold - 1.0);
    const std::vector<Index> set{0, 1, 2, 3};
    for (Index j = 4; j < 10; ++j)
      EXPECT_NEAR(f_cost(d.point(j), set, d, lambda), 0.5 * lambda, 1e-9);
  }
}

TEST(LambdaThreshold, NeedsTwoPoints) {
  try {
    lambda_threshold(DataMatrix(Matrix::Identity(3, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooFewPoints);
  }
}

TEST(Tracker, ReusesCurrentValuesAndCountsSolves) {
  const DataMatrix d = random_sphere_data(5, 10, 13);
  CostTracker tracker(d, 30.0);
  tracker.add_exemplar(4);
  const double v = tracker.evaluate(7);
  EXPECT_EQ(tracker.evaluations(), 1u);
  EXPECT_EQ(tracker.evaluate(7), v);
  EXPECT_EQ(tracker.evaluations(), 1u);
  EXPECT_TRUE(tracker.is_current(7));
  tracker.add_exemplar(2);
  EXPECT_FALSE(tracker.is_current(7));
  EXPECT_EQ(tracker.value(7), v);  // stale value kept as a bound
  const double fresh = tracker.evaluate(7);
  EXPECT_LE(fresh, v + 1e-9);
  const std::vector<Index> set{4, 2};
  EXPECT_NEAR(fresh, f_cost(d.point(7), set, d, 30.0), 1e-8);
}
