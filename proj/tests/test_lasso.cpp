#include <gtest/gtest.h>

#include "exsel/dataset.hpp"
#include "exsel/geometry.hpp"
#include "exsel/lasso.hpp"
#include "oracles.hpp"

using namespace exsel;

namespace {

constexpr double kTol = 1e-8;

// Random unit-column dictionary and unit target.
struct Instance {
  Matrix dict;
  Vector target;
};

Instance random_instance(CounterRng& rng, Index dim, Index m) {
  Instance inst;
  inst.dict = oracle::random_unit_columns(dim, m, rng);
  inst.target = oracle::random_unit(dim, rng);
  return inst;
}

}  // namespace

TEST(Lasso, EmptyDictionaryCostsHalfLambda) {
  CounterRng rng(1);
  const LassoProblem p{Matrix(3, 0), oracle::random_unit(3, rng), 40.0};
  const SparseCode code = solve_lasso(p);
  EXPECT_EQ(code.coeffs.size(), 0);
  EXPECT_EQ(code.objective, 20.0);
}

TEST(Lasso, TargetInDictionaryIsOneHot) {
  CounterRng rng(2);
  Matrix dict = oracle::random_unit_columns(6, 4, rng);
  const Vector x = dict.col(2);
  const SparseCode code = solve_lasso({dict, x, 100.0});
  EXPECT_NEAR(code.objective, 1.0 - 1.0 / 200.0, 1e-6);
  EXPECT_NEAR(code.coeffs(2), 1.0 - 1.0 / 100.0, 1e-6);
  EXPECT_NEAR(code.coeffs.lpNorm<1>(), 1.0 - 1.0 / 100.0, 1e-6);
}

TEST(Lasso, BelowCoherenceThresholdCodeVanishes) {
  // Three unit vectors whose pairwise |inner products| are all 0.5.
  Matrix pts(3, 3);
  pts << 1.0, 0.5, 0.5,
         0.0, std::sqrt(0.75), 0.5 / std::sqrt(0.75) * 0.5,
         0.0, 0.0, 0.0;
  pts(2, 2) = std::sqrt(1.0 - pts(0, 2) * pts(0, 2) - pts(1, 2) * pts(1, 2));
  ASSERT_NEAR(pts.col(1).dot(pts.col(2)), 0.5, 1e-12);
  const SparseCode code = solve_lasso({pts.leftCols(2), pts.col(2), 1.5});
  EXPECT_TRUE(code.coeffs.isZero(0.0));
  EXPECT_NEAR(code.objective, 0.75, 1e-12);
}

TEST(Lasso, OrthonormalPairAtLargeLambda) {
  const Matrix dict = Matrix::Identity(2, 2);
  Vector x(2);
  x << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const SparseCode code = solve_lasso({dict, x, 1e6});
  EXPECT_NEAR(code.objective, std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(code.coeffs(0), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(code.coeffs(1), 1.0 / std::sqrt(2.0), 1e-3);
}

TEST(Lasso, MatchesSignEnumerationOracle) {
  CounterRng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const Index dim = 2 + static_cast<Index>(rng.below(5));
    const Index m = 1 + static_cast<Index>(rng.below(7));
    const double lambda = std::pow(10.0, 0.2 + 3.0 * rng.uniform());
    const Instance inst = random_instance(rng, dim, m);
    const SparseCode code = solve_lasso({inst.dict, inst.target, lambda});
    const oracle::BruteLasso ref = oracle::brute_lasso(inst.dict, inst.target, lambda);
    EXPECT_NEAR(code.objective, ref.objective, kTol)
        << "trial " << trial << " D=" << dim << " M=" << m << " lambda=" << lambda;
  }
}

TEST(Lasso, SubgradientConditionsHold) {
  CounterRng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Index dim = 3 + static_cast<Index>(rng.below(8));
    const Index m = 1 + static_cast<Index>(rng.below(15));
    const double lambda = std::pow(10.0, 0.1 + 4.0 * rng.uniform());
    const Instance inst = random_instance(rng, dim, m);
    const SparseCode code = solve_lasso({inst.dict, inst.target, lambda});
    EXPECT_LE(oracle::coordinate_slack(inst.dict, inst.target, code.coeffs, lambda), kTol)
        << "trial " << trial;
    EXPECT_LE(code.gap, kTol);
  }
}

TEST(Lasso, ObjectiveMatchesRecomputation) {
  CounterRng rng(5);
  const Instance inst = random_instance(rng, 5, 8);
  const SparseCode code = solve_lasso({inst.dict, inst.target, 30.0});
  const Vector e = inst.target - inst.dict * code.coeffs;
  EXPECT_LE((e - code.residual).norm(), 1e-12);
  EXPECT_NEAR(code.objective, code.coeffs.lpNorm<1>() + 15.0 * e.squaredNorm(), 1e-9);
}

TEST(Lasso, ObjectiveWithinCostRange) {
  CounterRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const double lambda = 1.0 + std::pow(10.0, 3.0 * rng.uniform());
    const Instance inst = random_instance(rng, 4, 1 + static_cast<Index>(rng.below(6)));
    const double f = solve_lasso({inst.dict, inst.target, lambda}).objective;
    EXPECT_GE(f, 1.0 - 0.5 / lambda - 1e-6);
    EXPECT_LE(f, 0.5 * lambda + 1e-6);
  }
}

TEST(Lasso, NestedDictionariesNeverIncreaseCost) {
  CounterRng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const Instance inst = random_instance(rng, 6, 10);
    const double lambda = 5.0 + 500.0 * rng.uniform();
    double previous = 0.5 * lambda;
    for (Index m = 1; m <= 10; ++m) {
      const double f = solve_lasso({inst.dict.leftCols(m), inst.target, lambda}).objective;
      EXPECT_LE(f, previous + kTol);
      previous = f;
    }
  }
}

TEST(Lasso, NegatedColumnNegatesCoefficient) {
  CounterRng rng(8);
  const Instance inst = random_instance(rng, 5, 6);
  Matrix flipped = inst.dict;
  flipped.col(3) *= -1.0;
  const SparseCode a = solve_lasso({inst.dict, inst.target, 50.0});
  const SparseCode b = solve_lasso({flipped, inst.target, 50.0});
  EXPECT_NEAR(a.objective, b.objective, 1e-10);
  EXPECT_NEAR(a.coeffs(3), -b.coeffs(3), 1e-6);
}

TEST(Lasso, RankDeficientDictionaryConverges) {
  // More columns than dimensions at large lambda: the support system is
  // singular, which used to stall plain coordinate descent.
  CounterRng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng, 3, 9);
    const SparseCode code = solve_lasso({inst.dict, inst.target, 1e4});
    EXPECT_LE(code.gap, kTol);
    EXPECT_LE(oracle::coordinate_slack(inst.dict, inst.target, code.coeffs, 1e4), kTol);
  }
}

TEST(Lasso, LargeLambdaApproachesExactL1) {
  CounterRng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng, 3, 6);
    const SparseCode code = solve_lasso({inst.dict, inst.target, 1e6});
    const L1Result exact = l1_min_exact(inst.dict, inst.target);
    ASSERT_TRUE(exact.feasible());
    EXPECT_NEAR(code.objective, exact.value, 1e-3);
  }
}

TEST(Lasso, WarmStartGivesSameOptimum) {
  CounterRng rng(11);
  const Instance inst = random_instance(rng, 6, 9);
  const SparseCode cold = solve_lasso({inst.dict, inst.target, 200.0});
  const Vector warm_init = Vector::Constant(9, 0.3);
  const SparseCode warm = solve_lasso({inst.dict, inst.target, 200.0}, {}, &warm_init);
  EXPECT_NEAR(cold.objective, warm.objective, kTol);
}

TEST(Lasso, RejectsInvalidProblems) {
  const Matrix dict = Matrix::Identity(2, 2);
  Vector x(2);
  x << 1.0, 0.0;
  EXPECT_THROW(solve_lasso({dict, x, 1.0}), Error);
  EXPECT_THROW(solve_lasso({dict * 2.0, x, 10.0}), Error);
  EXPECT_THROW(solve_lasso({dict, x * 3.0, 10.0}), Error);
  LassoOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(solve_lasso({dict, x, 10.0}, bad), Error);
}

TEST(Lasso, ExhaustedIterationsReportNoConvergence) {
  CounterRng rng(12);
  const Instance inst = random_instance(rng, 8, 12);
  LassoOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  try {
    solve_lasso({inst.dict, inst.target, 1e5}, opts);
    FAIL() << "expected NoConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNoConvergence);
  }
}

TEST(LassoBatch, SingletonEqualsSingleSolve) {
  CounterRng rng(13);
  const Instance inst = random_instance(rng, 5, 7);
  const auto batch = solve_lasso_batch(inst.dict, inst.target, 80.0);
  const SparseCode single = solve_lasso({inst.dict, inst.target, 80.0});
  ASSERT_EQ(batch.size(), 1u);
  EXPECT_EQ(batch[0].coeffs, single.coeffs);
}

TEST(LassoBatch, TargetsInsideDictionaryHitLowerBound) {
  CounterRng rng(14);
  const Matrix dict = oracle::random_unit_columns(7, 5, rng);
  const double lambda = 25.0;
  for (const SparseCode& code : solve_lasso_batch(dict, dict, lambda))
    EXPECT_NEAR(code.objective, 1.0 - 0.5 / lambda, 1e-6);
}

TEST(LassoBatch, OrderStableAcrossThreadCounts) {
  CounterRng rng(15);
  const Matrix dict = oracle::random_unit_columns(6, 8, rng);
  const Matrix targets = oracle::random_unit_columns(6, 37, rng);
  const auto one = solve_lasso_batch(dict, targets, 60.0, {}, 1);
  const auto four = solve_lasso_batch(dict, targets, 60.0, {}, 4);
  for (std::size_t j = 0; j < one.size(); ++j) EXPECT_EQ(one[j].coeffs, four[j].coeffs);
}

TEST(LassoBatch, FailureCarriesTargetIndex) {
  CounterRng rng(16);
  const Matrix dict = oracle::random_unit_columns(8, 12, rng);
  const Matrix targets = oracle::random_unit_columns(8, 3, rng);
  LassoOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  try {
    solve_lasso_batch(dict, targets, 1e5, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNoConvergence);
    EXPECT_TRUE(e.index().has_value());
  }
}

namespace {

struct LeakReport {
  double worst_share = 0.0;         // max off-class share of l1 mass
  std::vector<char> leaky;          // some off-class coefficient nonzero
  std::vector<char> sp_suboptimal;  // in-class-only optimum violates KKT
};

// Codes every point over `dict_idx` and, independently, over its own class
// only. If the own-class optimum satisfies |lambda x_i^T e| <= 1 for every
// other-class column, it is a global optimum and no leakage is needed.
LeakReport leak_report(const DataMatrix& d, const std::vector<Index>& dict_idx,
                       double lambda) {
  const Labels& labels = *d.labels();
  const Matrix dict = d.columns(dict_idx);
  const auto codes = solve_lasso_batch(dict, d.points(), lambda);
  LeakReport r;
  for (Index j = 0; j < d.count(); ++j) {
    const int cls = labels[static_cast<std::size_t>(j)];
    const Vector& c = codes[static_cast<std::size_t>(j)].coeffs;
    double off = 0.0;
    std::vector<Index> own;
    for (Index i = 0; i < c.size(); ++i) {
      if (labels[static_cast<std::size_t>(dict_idx[static_cast<std::size_t>(i)])] == cls)
        own.push_back(i);
      else
        off += std::abs(c(i));
    }
    r.worst_share = std::max(r.worst_share, off / c.lpNorm<1>());
    r.leaky.push_back(off > 0.0);
    Matrix own_dict(dict.rows(), static_cast<Index>(own.size()));
    for (std::size_t a = 0; a < own.size(); ++a) own_dict.col(static_cast<Index>(a)) = dict.col(own[a]);
    const Vector e = solve_lasso_batch(own_dict, d.point(j), lambda)[0].residual;
    double worst_corr = 0.0;
    for (Index i = 0; i < c.size(); ++i)
      if (labels[static_cast<std::size_t>(dict_idx[static_cast<std::size_t>(i)])] != cls)
        worst_corr = std::max(worst_corr, lambda * std::abs(dict.col(i).dot(e)));
    r.sp_suboptimal.push_back(worst_corr > 1.0 + 1e-9);
  }
  return r;
}

}  // namespace

// At finite lambda the exact minimizer may put a little mass on the other
// subspace. Every leaking code must be one whose own-class optimum is
// certifiably not optimal, and the leaked share must shrink like 1/lambda.
TEST(LassoBatch, IndependentSubspacesLeakOnlyWhenForcedByOptimality) {
  const DataMatrix d = synth_union_of_subspaces({12, {3, 4}, {20, 25}, 0.0, 17});
  std::vector<Index> dict_idx;
  for (Index j = 0; j < 9; ++j) dict_idx.push_back(j);
  for (Index j = 20; j < 32; ++j) dict_idx.push_back(j);
  double previous = 1.0;
  for (double lambda : {1e2, 1e4, 1e6}) {
    const LeakReport r = leak_report(d, dict_idx, lambda);
    EXPECT_EQ(r.leaky, r.sp_suboptimal) << "lambda " << lambda;
    EXPECT_LT(r.worst_share, 2.0 / lambda);
    EXPECT_LT(r.worst_share, previous);
    previous = r.worst_share;
  }
}

TEST(LassoBatch, LargeLambdaCodesAreSubspacePreserving) {
  const DataMatrix d = synth_union_of_subspaces({12, {3, 4}, {20, 25}, 0.0, 17});
  std::vector<Index> dict_idx;
  for (Index j = 0; j < 9; ++j) dict_idx.push_back(j);
  for (Index j = 20; j < 32; ++j) dict_idx.push_back(j);
  EXPECT_LT(leak_report(d, dict_idx, 1e6).worst_share, 1e-6);
}

TEST(Lasso, IllConditionedDictionaryStillCertified) {
  // The same trial stream that once stalled at the rounding floor of the
  // duality gap: a nearly singular 4 x 4 dictionary with large coefficients.
  CounterRng rng(1010);
  int hard = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index dim = 2 + static_cast<Index>(rng.below(12));
    const Index m = 1 + static_cast<Index>(rng.below(25));
    const double lambda = std::pow(10.0, 0.05 + 5.0 * rng.uniform());
    const Matrix dict = oracle::random_unit_columns(dim, m, rng);
    const Vector x = oracle::random_unit(dim, rng);
    if (trial != 338) continue;
    const SparseCode code = solve_lasso({dict, x, lambda});
    EXPECT_GT(code.coeffs.lpNorm<1>(), 50.0);
    EXPECT_LE(oracle::coordinate_slack(dict, x, code.coeffs, lambda), kTol);
    ++hard;
  }
  EXPECT_EQ(hard, 1);
}
