#ifndef EXSEL_SELFREP_HPP_
#define EXSEL_SELFREP_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "exsel/dataset.hpp"
#include "exsel/error.hpp"
#include "exsel/lasso.hpp"
#include "exsel/parallel.hpp"

namespace exsel {

// Self-representation cost of a point against an exemplar subset X0:
//
//   f(x, X0) = min_c ||c||_1 + (lambda/2) ||x - sum_{i in X0} c_i x_i||^2,
//   f(x, {}) = lambda / 2,
//
// and the worst case F(X0) = max_j f(x_j, X0).

inline double f_cost(const Vector& x, std::span<const Index> exemplars,
                     const DataMatrix& data, double lambda,
                     const LassoOptions& options = {}) {
  require(lambda > 1.0, Errc::kInvalidArgument, "lambda must exceed 1");
  if (exemplars.empty()) return 0.5 * lambda;
  const Matrix dictionary = data.columns(exemplars);
  const Matrix gram = dictionary.transpose() * dictionary;
  return solve_lasso_gram(dictionary, gram, x, lambda, options).objective;
}

struct CostReport {
  Vector per_point;
  double sup_value = 0.0;
  Index argmax_index = 0;
};

inline CostReport F_cost(std::span<const Index> exemplars,
                         const DataMatrix& data, double lambda,
                         const LassoOptions& options = {},
                         unsigned threads = 1) {
  require(lambda > 1.0, Errc::kInvalidArgument, "lambda must exceed 1");
  CostReport report;
  report.per_point = Vector::Constant(data.count(), 0.5 * lambda);
  if (!exemplars.empty()) {
    const Matrix dictionary = data.columns(exemplars);
    const Matrix gram = dictionary.transpose() * dictionary;
    parallel_for(static_cast<std::size_t>(data.count()), threads,
                 [&](std::size_t j) {
                   const Index col = static_cast<Index>(j);
                   report.per_point(col) =
                       solve_lasso_gram(dictionary, gram, data.point(col),
                                        lambda, options)
                           .objective;
                 });
  }
  // First maximal entry, i.e. lowest index on ties.
  report.sup_value = report.per_point(0);
  report.argmax_index = 0;
  for (Index j = 1; j < report.per_point.size(); ++j) {
    if (report.per_point(j) > report.sup_value) {
      report.sup_value = report.per_point(j);
      report.argmax_index = j;
    }
  }
  return report;
}

// 1 / max_{i != j} |<x_i, x_j>|. Below this value every point outside the
// exemplar set (and its negation) has cost exactly lambda / 2. Returns
// +infinity when all pairs are orthogonal.
inline double lambda_threshold(const DataMatrix& data) {
  require(data.count() >= 2, Errc::kTooFewPoints,
          "lambda threshold needs at least two points");
  const Matrix inner = data.points().transpose() * data.points();
  double mu = 0.0;
  for (Index j = 0; j < inner.cols(); ++j)
    for (Index i = 0; i < j; ++i) mu = std::max(mu, std::abs(inner(i, j)));
  if (mu == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / mu;
}

// Incremental cost evaluator for a growing exemplar set. Each point keeps
// its latest code (warm start for the next solve) and the set version it
// was computed against; a value computed at the current version is reused
// without re-solving, an older one is a valid upper bound by monotonicity.
class CostTracker {
 public:
  CostTracker(const DataMatrix& data, double lambda, LassoOptions options = {})
      : data_(&data),
        lambda_(lambda),
        options_(options),
        dictionary_(data.dim(), 0),
        gram_(0, 0),
        values_(static_cast<std::size_t>(data.count()), 0.5 * lambda),
        versions_(static_cast<std::size_t>(data.count()), 0),
        codes_(static_cast<std::size_t>(data.count())) {
    require(lambda > 1.0, Errc::kInvalidArgument, "lambda must exceed 1");
  }

  void add_exemplar(Index j) {
    const Index m = dictionary_.cols();
    dictionary_.conservativeResize(Eigen::NoChange, m + 1);
    dictionary_.col(m) = data_->point(j);
    const Vector cross = dictionary_.transpose() * data_->point(j);
    gram_.conservativeResize(m + 1, m + 1);
    gram_.row(m) = cross.transpose();
    gram_.col(m) = cross;
    exemplars_.push_back(j);
  }

  const std::vector<Index>& exemplars() const { return exemplars_; }
  std::size_t version() const { return exemplars_.size(); }
  std::size_t evaluations() const { return evaluations_; }
  double lambda() const { return lambda_; }

  bool is_current(Index j) const {
    return versions_[static_cast<std::size_t>(j)] == version();
  }
  double value(Index j) const { return values_[static_cast<std::size_t>(j)]; }

  // f(x_j, current set); solves only if the stored value is stale.
  double evaluate(Index j) {
    const auto u = static_cast<std::size_t>(j);
    if (versions_[u] == version()) return values_[u];
    if (exemplars_.empty()) {
      values_[u] = 0.5 * lambda_;
    } else {
      const Vector* warm = codes_[u].size() > 0 ? &codes_[u] : nullptr;
      SparseCode code = solve_lasso_gram(dictionary_, gram_, data_->point(j),
                                         lambda_, options_, warm);
      values_[u] = code.objective;
      codes_[u] = std::move(code.coeffs);
      ++evaluations_;
    }
    versions_[u] = version();
    return values_[u];
  }

 private:
  const DataMatrix* data_;
  double lambda_;
  LassoOptions options_;
  Matrix dictionary_;
  Matrix gram_;
  std::vector<Index> exemplars_;
  std::vector<double> values_;
  std::vector<std::size_t> versions_;
  std::vector<Vector> codes_;
  std::size_t evaluations_ = 0;
};

}  // namespace exsel

#endif  // EXSEL_SELFREP_HPP_
