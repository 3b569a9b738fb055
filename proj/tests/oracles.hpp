#ifndef EXSEL_TESTS_ORACLES_HPP_
#define EXSEL_TESTS_ORACLES_HPP_

// Independent reference computations for the test suite. None of these
// call into the solver code they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "exsel/dataset.hpp"
#include "exsel/random.hpp"

namespace oracle {

using exsel::Index;
using exsel::Matrix;
using exsel::Vector;

struct BruteLasso {
  Vector coeffs;
  double objective = std::numeric_limits<double>::infinity();
};

// Enumerates every sign pattern in {-1, 0, +1}^m, solves the stationarity
// system D_S^T D_S c_S = D_S^T x - s_S / lambda on the support, and keeps
// the best sign-consistent candidate. Some minimizer always has linearly
// independent support columns, so singular supports can be skipped.
inline BruteLasso brute_lasso(const Matrix& dict, const Vector& x, double lambda) {
  const Index m = dict.cols();
  BruteLasso best;
  best.coeffs = Vector::Zero(m);
  best.objective = 0.5 * lambda * x.squaredNorm();
  long total = 1;
  for (Index i = 0; i < m; ++i) total *= 3;
  for (long code = 1; code < total; ++code) {
    long rest = code;
    std::vector<Index> support;
    std::vector<double> signs;
    for (Index i = 0; i < m; ++i) {
      const int digit = static_cast<int>(rest % 3);
      rest /= 3;
      if (digit != 0) {
        support.push_back(i);
        signs.push_back(digit == 1 ? 1.0 : -1.0);
      }
    }
    const Index s = static_cast<Index>(support.size());
    Matrix sub(dict.rows(), s);
    for (Index a = 0; a < s; ++a) sub.col(a) = dict.col(support[a]);
    Vector rhs = sub.transpose() * x;
    for (Index a = 0; a < s; ++a) rhs(a) -= signs[a] / lambda;
    Eigen::FullPivLU<Matrix> lu(sub.transpose() * sub);
    if (!lu.isInvertible()) continue;
    const Vector cs = lu.solve(rhs);
    bool consistent = true;
    for (Index a = 0; a < s; ++a)
      if (cs(a) * signs[a] <= 0.0) consistent = false;
    if (!consistent) continue;
    Vector c = Vector::Zero(m);
    for (Index a = 0; a < s; ++a) c(support[a]) = cs(a);
    const double value = c.lpNorm<1>() + 0.5 * lambda * (x - dict * c).squaredNorm();
    if (value < best.objective) {
      best.objective = value;
      best.coeffs = c;
    }
  }
  return best;
}

// Largest violation of 0 in d(||c||_1) - lambda D^T (x - D c), measured on
// the subgradient scale: lambda d_i^T e must equal sign(c_i) on the support
// and lie in [-1, 1] off it.
inline double subgradient_violation(const Matrix& dict, const Vector& x,
                                    const Vector& c, double lambda) {
  const Vector g = lambda * (dict.transpose() * (x - dict * c));
  double worst = 0.0;
  for (Index i = 0; i < c.size(); ++i) {
    if (c(i) > 0.0) worst = std::max(worst, std::abs(g(i) - 1.0));
    else if (c(i) < 0.0) worst = std::max(worst, std::abs(g(i) + 1.0));
    else worst = std::max(worst, std::abs(g(i)) - 1.0);
  }
  return worst;
}

// Objective-scale optimality: the largest first-order decrease available
// from moving one coordinate, i.e. max_i dist(0, subdifferential_i) / lambda.
inline double coordinate_slack(const Matrix& dict, const Vector& x,
                               const Vector& c, double lambda) {
  return subgradient_violation(dict, x, c, lambda) / lambda;
}

template <typename Score>
double brute_assignment_max(Index n, Score score) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = -std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += score(i, perm[static_cast<std::size_t>(i)]);
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Accuracy in percent by trying every relabelling of predicted ids 0..n-1
// onto true ids 0..n-1.
inline double brute_accuracy(const std::vector<int>& truth,
                             const std::vector<int>& pred, Index n) {
  Matrix counts = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < truth.size(); ++j) counts(truth[j], pred[j]) += 1.0;
  const double matched =
      brute_assignment_max(n, [&](Index i, Index j) { return counts(i, j); });
  return 100.0 * matched / static_cast<double>(truth.size());
}

// Class-averaged F-score in percent over every relabelling, computed from
// raw label vectors with classes/groups indexed 0..n-1 (empty ones count).
inline double brute_fscore(const std::vector<int>& truth,
                           const std::vector<int>& pred, Index n) {
  auto f = [&](Index cls, Index grp) {
    double both = 0.0, in_class = 0.0, in_group = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const bool a = truth[j] == cls, b = pred[j] == grp;
      both += (a && b);
      in_class += a;
      in_group += b;
    }
    if (both == 0.0) return 0.0;
    const double p = both / in_group, r = both / in_class;
    return 2.0 * p * r / (p + r);
  };
  return 100.0 * brute_assignment_max(n, f) / static_cast<double>(n);
}

inline Vector random_unit(Index dim, exsel::CounterRng& rng) {
  Vector v(dim);
  do {
    for (Index i = 0; i < dim; ++i) v(i) = rng.normal();
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

inline Matrix random_unit_columns(Index dim, Index count, exsel::CounterRng& rng) {
  Matrix m(dim, count);
  for (Index j = 0; j < count; ++j) m.col(j) = random_unit(dim, rng);
  return m;
}

// Angle-sorted covering radius on S^1: half the largest angular gap
// between consecutive points.
inline double circle_covering_radius(const Matrix& points) {
  std::vector<double> angles;
  for (Index j = 0; j < points.cols(); ++j)
    angles.push_back(std::atan2(points(1, j), points(0, j)));
  std::sort(angles.begin(), angles.end());
  double gap = 2.0 * M_PI - (angles.back() - angles.front());
  for (std::size_t i = 1; i < angles.size(); ++i)
    gap = std::max(gap, angles[i] - angles[i - 1]);
  return 0.5 * gap;
}

}  // namespace oracle

#endif  // EXSEL_TESTS_ORACLES_HPP_
