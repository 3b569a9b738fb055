#ifndef EXSEL_LASSO_HPP_
#define EXSEL_LASSO_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "exsel/dataset.hpp"
#include "exsel/error.hpp"
#include "exsel/parallel.hpp"

namespace exsel {

// Solves
//
//   min_c  ||c||_1 + (lambda / 2) ||x - D c||_2^2
//
// by cyclic coordinate descent with soft thresholding. Convergence is
// certified by the duality gap against the dual
//
//   max_nu  <nu, x> - ||nu||^2 / (2 lambda)   s.t.  ||D^T nu||_inf <= 1,
//
// evaluated at the rescaled residual nu = lambda * s * e. Once the support
// has settled, an exact solve on the support with fixed signs ("polish")
// replaces the slow tail of coordinate descent whenever it lowers the gap.

struct LassoOptions {
  double tol = 1e-8;        // duality-gap target
  long max_iter = 100000;   // coordinate sweeps
  int polish_every = 4;     // sweeps between support polish attempts
};

// Coefficients with magnitude below this are set to zero after convergence.
inline constexpr double kCoefficientSnap = 1e-12;

struct SparseCode {
  Vector coeffs;    // one entry per dictionary column
  Vector residual;  // x - D c
  double objective = 0.0;
  double gap = 0.0;
  long iterations = 0;
};

// A single self-representation problem; the library expects unit-norm
// columns and target, and lambda > 1.
struct LassoProblem {
  Matrix dictionary;
  Vector target;
  double lambda = 0.0;

  void validate(double norm_tol = 1e-10) const {
    require(lambda > 1.0, Errc::kInvalidArgument, "lambda must exceed 1");
    require(dictionary.rows() == target.size() || dictionary.cols() == 0,
            Errc::kBadDim, "dictionary rows must match target length");
    require(std::abs(target.norm() - 1.0) <= norm_tol, Errc::kInvalidArgument,
            "target must have unit norm");
    for (Index i = 0; i < dictionary.cols(); ++i)
      require(std::abs(dictionary.col(i).norm() - 1.0) <= norm_tol,
              Errc::kInvalidArgument,
              "dictionary column " + std::to_string(i) + " must have unit norm",
              static_cast<std::size_t>(i));
  }
};

inline double lasso_objective(const Vector& coeffs, const Vector& residual,
                              double lambda) {
  return coeffs.lpNorm<1>() + 0.5 * lambda * residual.squaredNorm();
}

struct GapCertificate {
  Vector residual;
  double primal = 0.0;
  double dual = 0.0;
  double gap() const { return primal - dual; }
};

inline GapCertificate duality_certificate(const Matrix& dictionary,
                                          const Vector& target,
                                          const Vector& coeffs, double lambda) {
  GapCertificate cert;
  cert.residual = target;
  if (coeffs.size() > 0) cert.residual.noalias() -= dictionary * coeffs;
  cert.primal = lasso_objective(coeffs, cert.residual, lambda);
  double scale = 1.0;
  if (coeffs.size() > 0) {
    const double corr = (dictionary.transpose() * cert.residual).lpNorm<Eigen::Infinity>();
    if (lambda * corr > 1.0) scale = 1.0 / (lambda * corr);
  }
  cert.dual = lambda * scale * cert.residual.dot(target) -
              0.5 * lambda * scale * scale * cert.residual.squaredNorm();
  return cert;
}

namespace detail {

inline double soft_threshold(double z, double threshold) {
  if (z > threshold) return z - threshold;
  if (z < -threshold) return z + threshold;
  return 0.0;
}

// Feature-sign step on the current support S with signs s. The objective
// restricted to S with s fixed is s^T c + (lambda/2)||x - D_S c||^2; move
// from c toward its minimizer (or, if G_SS is singular, along a null
// direction of G_SS that decreases s^T c), stopping at the first
// coefficient that would change sign and removing it. Repeats until the
// restricted minimizer is reached with consistent signs. The lasso
// objective never increases along the way.
inline bool polish_on_support(const Matrix& gram, const Vector& correlations,
                              const Vector& coeffs, double lambda,
                              Vector& candidate) {
  candidate = coeffs;
  bool moved = false;
  for (Index round = 0; round <= coeffs.size(); ++round) {
    std::vector<Index> support;
    for (Index i = 0; i < candidate.size(); ++i)
      if (candidate(i) != 0.0) support.push_back(i);
    if (support.empty()) return moved;
    const Index s = static_cast<Index>(support.size());
    Matrix block(s, s);
    Vector rhs(s), current(s), signs(s);
    for (Index a = 0; a < s; ++a) {
      current(a) = candidate(support[a]);
      signs(a) = current(a) > 0 ? 1.0 : -1.0;
      rhs(a) = correlations(support[a]) - signs(a) / lambda;
      for (Index b = 0; b < s; ++b) block(a, b) = gram(support[a], support[b]);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(block);
    const Vector& ev = eig.eigenvalues();
    const double cutoff = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    Vector direction;
    double step_limit = 1.0;
    if (ev(0) > cutoff) {
      direction = eig.eigenvectors() *
                      ((eig.eigenvectors().transpose() * rhs).array() / ev.array()).matrix() -
                  current;
    } else {
      direction = eig.eigenvectors().col(0);
      const double slope = signs.dot(direction);
      if (std::abs(slope) <= 1e-14) return moved;
      if (slope > 0) direction = -direction;
      step_limit = std::numeric_limits<double>::infinity();
    }

    double step = step_limit;
    Index blocking = -1;
    for (Index a = 0; a < s; ++a) {
      if (current(a) * direction(a) < 0.0) {
        const double t = -current(a) / direction(a);
        if (t < step) {
          step = t;
          blocking = a;
        }
      }
    }
    if (!std::isfinite(step)) return moved;
    for (Index a = 0; a < s; ++a) candidate(support[a]) = current(a) + step * direction(a);
    moved = true;
    if (blocking < 0) return true;
    candidate(support[blocking]) = 0.0;
  }
  return moved;
}

// Largest coordinate-wise distance from 0 to the subdifferential, divided
// by lambda. Zero exactly at a minimizer.
inline double kkt_slack(const Vector& grad, const Vector& coeffs, double lambda) {
  const double threshold = 1.0 / lambda;
  double worst = 0.0;
  for (Index i = 0; i < coeffs.size(); ++i) {
    const double g = grad(i);
    if (coeffs(i) > 0.0) worst = std::max(worst, std::abs(g - threshold));
    else if (coeffs(i) < 0.0) worst = std::max(worst, std::abs(g + threshold));
    else worst = std::max(worst, std::abs(g) - threshold);
  }
  return worst;
}

// Both the duality gap and the coordinate KKT slack must be within tol. The
// gap cannot be resolved below roughly eps * lambda * |c|_1 * (1 + |c|_1) in
// double precision, so it is held to that floor when the floor is larger.
inline bool converged(const GapCertificate& cert, const Matrix& dictionary,
                      const Vector& coeffs, double lambda, double tol) {
  const double l1 = coeffs.lpNorm<1>();
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * lambda * l1 * (1.0 + l1);
  if (cert.gap() > std::max(tol, floor)) return false;
  const Vector grad = dictionary.transpose() * cert.residual;
  return kkt_slack(grad, coeffs, lambda) <= tol;
}

}  // namespace detail

// Core solver over a precomputed Gram matrix D^T D. No input validation;
// callers guarantee shapes and lambda > 1.
inline SparseCode solve_lasso_gram(const Matrix& dictionary, const Matrix& gram,
                                   const Vector& target, double lambda,
                                   const LassoOptions& options = {},
                                   const Vector* warm_start = nullptr) {
  const Index m = dictionary.cols();
  SparseCode code;
  if (m == 0) {
    code.coeffs = Vector(0);
    code.residual = target;
    code.objective = 0.5 * lambda;
    return code;
  }

  const Vector correlations = dictionary.transpose() * target;
  Vector c = Vector::Zero(m);
  if (warm_start && warm_start->size() > 0) {
    const Index n = std::min<Index>(m, warm_start->size());
    c.head(n) = warm_start->head(n);
  }
  Vector grad = correlations - gram * c;  // D^T (x - D c)
  const double threshold = 1.0 / lambda;

  GapCertificate cert = duality_certificate(dictionary, target, c, lambda);
  long sweep = 0;
  bool done = detail::converged(cert, dictionary, c, lambda, options.tol);
  while (!done && sweep < options.max_iter) {
    ++sweep;
    for (Index i = 0; i < m; ++i) {
      const double gii = gram(i, i);
      if (gii <= 0.0) continue;
      const double old = c(i);
      const double updated =
          detail::soft_threshold(grad(i) + gii * old, threshold) / gii;
      if (updated != old) {
        grad.noalias() -= (updated - old) * gram.col(i);
        c(i) = updated;
      }
    }
    cert = duality_certificate(dictionary, target, c, lambda);
    done = detail::converged(cert, dictionary, c, lambda, options.tol);
    if (!done && sweep % options.polish_every == 0) {
      Vector candidate;
      if (detail::polish_on_support(gram, correlations, c, lambda, candidate)) {
        GapCertificate polished =
            duality_certificate(dictionary, target, candidate, lambda);
        if (polished.primal < cert.primal) {
          c = std::move(candidate);
          cert = std::move(polished);
          grad = correlations - gram * c;
          done = detail::converged(cert, dictionary, c, lambda, options.tol);
        }
      }
    }
  }
  if (!done) {
    throw Error(Errc::kNoConvergence,
                "coordinate descent stopped after " + std::to_string(sweep) +
                    " sweeps with duality gap " + std::to_string(cert.gap()));
  }

  bool snapped = false;
  for (Index i = 0; i < m; ++i) {
    if (c(i) != 0.0 && std::abs(c(i)) < kCoefficientSnap) {
      c(i) = 0.0;
      snapped = true;
    }
  }
  if (snapped) cert = duality_certificate(dictionary, target, c, lambda);

  code.coeffs = std::move(c);
  code.residual = std::move(cert.residual);
  code.objective = cert.primal;
  code.gap = std::max(0.0, cert.primal - cert.dual);
  code.iterations = sweep;
  return code;
}

inline SparseCode solve_lasso(const LassoProblem& problem,
                              const LassoOptions& options = {},
                              const Vector* warm_start = nullptr) {
  problem.validate();
  require(options.tol > 0.0, Errc::kInvalidArgument, "tol must be positive");
  const Matrix gram = problem.dictionary.transpose() * problem.dictionary;
  return solve_lasso_gram(problem.dictionary, gram, problem.target,
                          problem.lambda, options, warm_start);
}

// Solves one problem per target column over a shared dictionary. Results
// are in target order regardless of `threads`. A failure is rethrown with
// the target index attached.
inline std::vector<SparseCode> solve_lasso_batch(const Matrix& dictionary,
                                                 const Matrix& targets,
                                                 double lambda,
                                                 const LassoOptions& options = {},
                                                 unsigned threads = 1) {
  require(lambda > 1.0, Errc::kInvalidArgument, "lambda must exceed 1");
  require(options.tol > 0.0, Errc::kInvalidArgument, "tol must be positive");
  require(dictionary.cols() == 0 || dictionary.rows() == targets.rows(),
          Errc::kBadDim, "dictionary rows must match target length");
  const Matrix gram = dictionary.transpose() * dictionary;
  std::vector<SparseCode> codes(static_cast<std::size_t>(targets.cols()));
  parallel_for(codes.size(), threads, [&](std::size_t j) {
    try {
      codes[j] = solve_lasso_gram(dictionary, gram,
                                  targets.col(static_cast<Index>(j)), lambda,
                                  options);
    } catch (const Error& e) {
      throw Error(e.code(), "target " + std::to_string(j) + ": " + e.what(), j);
    }
  });
  return codes;
}

}  // namespace exsel

#endif  // EXSEL_LASSO_HPP_
