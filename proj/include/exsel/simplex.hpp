#ifndef EXSEL_SIMPLEX_HPP_
#define EXSEL_SIMPLEX_HPP_

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "exsel/dataset.hpp"

namespace exsel {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  double value = std::numeric_limits<double>::quiet_NaN();
};

// Dense two-phase tableau simplex with Bland's rule for
//
//   min c^T x   s.t.  A x = b,  x >= 0.
//
// Meant for oracle-sized problems (a few hundred columns). After the
// optimal basis is found the basic solution is recomputed from the
// original data by an LU solve, which removes most tableau drift.
class DenseSimplex {
 public:
  explicit DenseSimplex(double pivot_tol = 1e-11, double feas_tol = 1e-9)
      : pivot_tol_(pivot_tol), feas_tol_(feas_tol) {}

  LpResult solve(const Matrix& a, const Vector& b, const Vector& c) const {
    const Index m = a.rows();
    const Index n = a.cols();
    LpResult result;
    if (m == 0) {
      // No constraints: optimum at 0 unless some cost is negative.
      for (Index j = 0; j < n; ++j)
        if (c(j) < 0.0) {
          result.status = LpStatus::kUnbounded;
          return result;
        }
      result.status = LpStatus::kOptimal;
      result.x = Vector::Zero(n);
      result.value = 0.0;
      return result;
    }

    // Tableau columns: [x (n) | artificials (m) | rhs].
    const Index width = n + m + 1;
    Matrix t = Matrix::Zero(m + 1, width);
    for (Index i = 0; i < m; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      t.row(i).head(n) = sign * a.row(i);
      t(i, n + i) = 1.0;
      t(i, width - 1) = sign * b(i);
    }
    std::vector<Index> basis(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;
    std::vector<char> active_row(static_cast<std::size_t>(m), 1);

    // Phase I: minimize the sum of artificials.
    Vector phase1 = Vector::Zero(width - 1);
    phase1.segment(n, m).setOnes();
    set_objective(t, basis, phase1, active_row);
    if (!iterate(t, basis, active_row, width - 1)) {
      result.status = LpStatus::kUnbounded;  // cannot happen in phase I
      return result;
    }
    if (-t(m, width - 1) > feas_tol_ * std::max(1.0, b.cwiseAbs().maxCoeff())) {
      result.status = LpStatus::kInfeasible;
      return result;
    }

    // Pivot remaining artificials out; rows where that is impossible are
    // redundant and are dropped.
    for (Index i = 0; i < m; ++i) {
      if (!active_row[static_cast<std::size_t>(i)] ||
          basis[static_cast<std::size_t>(i)] < n)
        continue;
      Index entering = -1;
      for (Index j = 0; j < n; ++j)
        if (std::abs(t(i, j)) > pivot_tol_ * 100) {
          entering = j;
          break;
        }
      if (entering < 0) {
        active_row[static_cast<std::size_t>(i)] = 0;
      } else {
        pivot(t, basis, i, entering);
      }
    }

    // Phase II over the original columns only.
    Vector phase2 = Vector::Zero(width - 1);
    phase2.head(n) = c;
    set_objective(t, basis, phase2, active_row);
    if (!iterate(t, basis, active_row, n)) {
      result.status = LpStatus::kUnbounded;
      return result;
    }

    result.status = LpStatus::kOptimal;
    result.x = Vector::Zero(n);
    std::vector<Index> rows, cols;
    for (Index i = 0; i < m; ++i) {
      if (!active_row[static_cast<std::size_t>(i)]) continue;
      const Index j = basis[static_cast<std::size_t>(i)];
      if (j < n) {
        rows.push_back(i);
        cols.push_back(j);
        result.x(j) = t(i, width - 1);
      }
    }
    refine(a, b, rows, cols, result.x);
    result.value = c.dot(result.x);
    return result;
  }

 private:
  void set_objective(Matrix& t, const std::vector<Index>& basis,
                     const Vector& cost, const std::vector<char>& active_row) const {
    const Index m = t.rows() - 1;
    t.row(m).setZero();
    t.row(m).head(cost.size()) = cost.transpose();
    for (Index i = 0; i < m; ++i) {
      if (!active_row[static_cast<std::size_t>(i)]) continue;
      const double cb = cost(basis[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t.row(m) -= cb * t.row(i);
    }
  }

  void pivot(Matrix& t, std::vector<Index>& basis, Index row, Index col) const {
    t.row(row) /= t(row, col);
    for (Index i = 0; i < t.rows(); ++i) {
      if (i == row) continue;
      const double factor = t(i, col);
      if (factor != 0.0) t.row(i) -= factor * t.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  }

  // Bland's rule iterations over the first `n_cols` columns. Returns false
  // when the objective is unbounded below.
  bool iterate(Matrix& t, std::vector<Index>& basis,
               const std::vector<char>& active_row, Index n_cols) const {
    const Index m = t.rows() - 1;
    const Index rhs = t.cols() - 1;
    while (true) {
      Index entering = -1;
      for (Index j = 0; j < n_cols; ++j)
        if (t(m, j) < -pivot_tol_) {
          entering = j;
          break;
        }
      if (entering < 0) return true;
      Index leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        if (!active_row[static_cast<std::size_t>(i)]) continue;
        const double coef = t(i, entering);
        if (coef <= pivot_tol_) continue;
        const double ratio = t(i, rhs) / coef;
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 &&
             basis[static_cast<std::size_t>(i)] <
                 basis[static_cast<std::size_t>(leaving)])) {
          best_ratio = ratio;
          leaving = i;
        }
      }
      if (leaving < 0) return false;
      pivot(t, basis, leaving, entering);
    }
  }

  // Recomputes basic variables from the original constraints.
  void refine(const Matrix& a, const Vector& b, const std::vector<Index>& rows,
              const std::vector<Index>& cols, Vector& x) const {
    if (rows.empty() || rows.size() != cols.size()) return;
    const Index k = static_cast<Index>(rows.size());
    Matrix block(k, k);
    Vector rhs(k);
    for (Index r = 0; r < k; ++r) {
      rhs(r) = b(rows[static_cast<std::size_t>(r)]);
      for (Index c = 0; c < k; ++c)
        block(r, c) = a(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    }
    Eigen::FullPivLU<Matrix> lu(block);
    if (!lu.isInvertible()) return;
    const Vector sol = lu.solve(rhs);
    if (sol.minCoeff() < -feas_tol_) return;
    // Only accept if the refined point still satisfies every row.
    Vector candidate = x;
    for (Index c = 0; c < k; ++c)
      candidate(cols[static_cast<std::size_t>(c)]) = std::max(0.0, sol(c));
    if ((a * candidate - b).cwiseAbs().maxCoeff() <=
        (a * x - b).cwiseAbs().maxCoeff() + 1e-12)
      x = candidate;
  }

  double pivot_tol_;
  double feas_tol_;
};

}  // namespace exsel

#endif  // EXSEL_SIMPLEX_HPP_
