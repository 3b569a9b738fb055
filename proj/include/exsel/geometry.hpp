#ifndef EXSEL_GEOMETRY_HPP_
#define EXSEL_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "exsel/dataset.hpp"
#include "exsel/error.hpp"
#include "exsel/simplex.hpp"

namespace exsel {

// Brute-force geometric oracles: exact l1 minimization (the lambda -> inf
// limit of the self-representation cost), the gauge of the symmetric hull
// conv(±X0), its inradius, and the covering radius of ±X0 on the sphere.

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();
inline constexpr double kSpanTol = 1e-9;

namespace detail {

// Orthonormal basis of the column span.
inline Matrix span_basis(const Matrix& columns, double rel_tol = 1e-10) {
  if (columns.cols() == 0) return Matrix(columns.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

inline bool in_span(const Matrix& basis, const Vector& x) {
  const Vector residual = x - basis * (basis.transpose() * x);
  return residual.norm() <= kSpanTol;
}

}  // namespace detail

struct L1Result {
  double value = kInfeasible;
  Vector coeffs;
  bool feasible() const { return std::isfinite(value); }
};

// min ||c||_1 s.t. x = D c, via the LP min 1^T (u + v), D (u - v) = x,
// u, v >= 0, posed in an orthonormal basis of span(D) so the equality rows
// are independent. Returns the +infinity sentinel if x is not in span(D).
inline L1Result l1_min_exact(const Matrix& dictionary, const Vector& target) {
  L1Result out;
  const Index m = dictionary.cols();
  const Matrix basis = detail::span_basis(dictionary);
  if (!detail::in_span(basis, target)) return out;
  if (m == 0) {
    out.value = 0.0;
    out.coeffs = Vector(0);
    return out;
  }
  const Matrix reduced = basis.transpose() * dictionary;
  Matrix a(reduced.rows(), 2 * m);
  a << reduced, -reduced;
  const Vector b = basis.transpose() * target;
  const LpResult lp = DenseSimplex().solve(a, b, Vector::Ones(2 * m));
  if (lp.status != LpStatus::kOptimal) return out;
  out.coeffs = lp.x.head(m) - lp.x.tail(m);
  out.value = out.coeffs.lpNorm<1>();
  return out;
}

// K0 = conv(±X0): the exemplars and their negations.
class SymmetricHull {
 public:
  explicit SymmetricHull(const Matrix& exemplars, double norm_tol = 1e-10)
      : exemplar_count_(exemplars.cols()) {
    for (Index i = 0; i < exemplars.cols(); ++i)
      require(std::abs(exemplars.col(i).norm() - 1.0) <= norm_tol,
              Errc::kInvalidArgument,
              "hull generator " + std::to_string(i) + " must have unit norm",
              static_cast<std::size_t>(i));
    generators_.resize(exemplars.rows(), 2 * exemplars.cols());
    generators_ << exemplars, -exemplars;
    basis_ = detail::span_basis(exemplars);
  }

  const Matrix& generators() const { return generators_; }
  Index exemplar_count() const { return exemplar_count_; }
  Index dim() const { return generators_.rows(); }
  Index rank() const { return basis_.cols(); }
  const Matrix& span() const { return basis_; }

 private:
  Index exemplar_count_;
  Matrix generators_;
  Matrix basis_;
};

// Gauge ||x||_{K0} = inf{t > 0 : x / t in K0}, computed through the polar
// body: ||x||_{K0} = max{<x, y> : |<g, y>| <= 1 for every generator g}, with
// y restricted to span(K0). +infinity if x is outside the span.
inline double minkowski_functional(const SymmetricHull& hull, const Vector& x) {
  const Matrix& basis = hull.span();
  if (!detail::in_span(basis, x)) return kInfeasible;
  const Index r = basis.cols();
  if (r == 0) return 0.0;
  const Matrix g = hull.generators().transpose() * basis;  // rows: generators
  const Index rows = g.rows();
  // Variables [y+ (r) | y- (r) | slack (rows)].
  Matrix a(rows, 2 * r + rows);
  a << g, -g, Matrix::Identity(rows, rows);
  const Vector b = Vector::Ones(rows);
  const Vector xr = basis.transpose() * x;
  Vector c = Vector::Zero(2 * r + rows);
  c.head(r) = -xr;
  c.segment(r, r) = xr;
  const LpResult lp = DenseSimplex().solve(a, b, c);
  require(lp.status == LpStatus::kOptimal, Errc::kDegenerateHull,
          "polar program of the hull is not bounded");
  const Vector y = lp.x.head(r) - lp.x.segment(r, r);
  return xr.dot(y);
}

// Deterministic direction grid on S^1 (D = 2) or S^2 (D = 3) with angular
// spacing at most `resolution`.
inline Matrix sphere_grid(Index dim, double resolution) {
  require(resolution > 0.0 && resolution < 1.0, Errc::kInvalidArgument,
          "grid resolution must lie in (0, 1) radians");
  const double two_pi = 2.0 * std::numbers::pi;
  if (dim == 2) {
    const Index count = static_cast<Index>(std::ceil(two_pi / resolution));
    Matrix grid(2, count);
    for (Index k = 0; k < count; ++k) {
      const double theta = two_pi * static_cast<double>(k) / static_cast<double>(count);
      grid(0, k) = std::cos(theta);
      grid(1, k) = std::sin(theta);
    }
    return grid;
  }
  require(dim == 3, Errc::kUnsupportedDim,
          "sphere grids are only available for D = 2 or 3");
  const Index rings = static_cast<Index>(std::ceil(std::numbers::pi / resolution));
  std::vector<Eigen::Vector3d> points;
  for (Index p = 0; p <= rings; ++p) {
    const double phi = std::numbers::pi * static_cast<double>(p) / static_cast<double>(rings);
    const double s = std::sin(phi);
    const Index around = std::max<Index>(1, static_cast<Index>(std::ceil(two_pi * s / resolution)));
    for (Index q = 0; q < around; ++q) {
      const double theta = two_pi * static_cast<double>(q) / static_cast<double>(around);
      points.emplace_back(s * std::cos(theta), s * std::sin(theta), std::cos(phi));
    }
  }
  Matrix grid(3, static_cast<Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) grid.col(static_cast<Index>(k)) = points[k];
  return grid;
}

// max over grid directions w of min over the given points v of angle(v, w).
inline double covering_radius(const Matrix& points, double resolution) {
  require(points.cols() >= 1, Errc::kInvalidArgument, "no points given");
  require(points.rows() == 2 || points.rows() == 3, Errc::kUnsupportedDim,
          "covering radius grid search needs D = 2 or 3");
  for (Index i = 0; i < points.cols(); ++i)
    require(std::abs(points.col(i).norm() - 1.0) <= 1e-10, Errc::kInvalidArgument,
            "covering radius needs unit-norm points", static_cast<std::size_t>(i));
  const Matrix pts_t = points.transpose();
  auto angle_to_nearest = [&](const Vector& w) {
    return std::acos(std::clamp((pts_t * w).maxCoeff(), -1.0, 1.0));
  };
  double worst = 0.0;
  if (points.rows() == 2) {
    // Directions generated on the fly so very fine circle grids stay cheap.
    require(resolution > 0.0 && resolution < 1.0, Errc::kInvalidArgument,
            "grid resolution must lie in (0, 1) radians");
    const double two_pi = 2.0 * std::numbers::pi;
    const Index count = static_cast<Index>(std::ceil(two_pi / resolution));
    double worst_cos = 1.0;
    for (Index k = 0; k < count; ++k) {
      const double theta = two_pi * static_cast<double>(k) / static_cast<double>(count);
      const double cw = std::cos(theta), sw = std::sin(theta);
      double best = -1.0;
      for (Index i = 0; i < points.cols(); ++i)
        best = std::max(best, points(0, i) * cw + points(1, i) * sw);
      worst_cos = std::min(worst_cos, best);
    }
    return std::acos(std::clamp(worst_cos, -1.0, 1.0));
  }
  const Matrix grid = sphere_grid(points.rows(), resolution);
  for (Index k = 0; k < grid.cols(); ++k) worst = std::max(worst, angle_to_nearest(grid.col(k)));
  return worst;
}

// Radius of the largest ball centred at 0 inside K0:
// min over grid directions u of 1 / ||u||_{K0}.
inline double inradius(const SymmetricHull& hull, double resolution) {
  require(hull.dim() == 2 || hull.dim() == 3, Errc::kUnsupportedDim,
          "inradius grid search needs D = 2 or 3");
  require(hull.rank() == hull.dim(), Errc::kDegenerateHull,
          "hull does not span the ambient space");
  const Matrix grid = sphere_grid(hull.dim(), resolution);
  double radius = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < grid.cols(); ++k)
    radius = std::min(radius, 1.0 / minkowski_functional(hull, grid.col(k)));
  return radius;
}

// Grid estimate of F_inf(X0) = sup over unit x of min ||c||_1 s.t. x = X0 c.
inline double sup_l1_cost_on_sphere(const Matrix& exemplars, double resolution) {
  require(exemplars.rows() == 2 || exemplars.rows() == 3, Errc::kUnsupportedDim,
          "sphere sup needs D = 2 or 3");
  const Matrix grid = sphere_grid(exemplars.rows(), resolution);
  double sup = 0.0;
  for (Index k = 0; k < grid.cols(); ++k)
    sup = std::max(sup, l1_min_exact(exemplars, grid.col(k)).value);
  return sup;
}

}  // namespace exsel

#endif  // EXSEL_GEOMETRY_HPP_
