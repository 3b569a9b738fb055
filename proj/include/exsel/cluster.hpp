#ifndef EXSEL_CLUSTER_HPP_
#define EXSEL_CLUSTER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "exsel/dataset.hpp"
#include "exsel/error.hpp"
#include "exsel/ffs.hpp"
#include "exsel/lasso.hpp"
#include "exsel/parallel.hpp"
#include "exsel/random.hpp"

namespace exsel {

inline constexpr double kZeroCodeNorm = 1e-12;

struct AffinityGraph {
  Index size = 0;
  // Row i of W: the chosen neighbours of i, most similar first.
  std::vector<std::vector<Index>> neighbors;
  // A = W + W^T, entries in {0, 1, 2}, zero diagonal.
  Eigen::SparseMatrix<double> affinity;
  // Points whose code was zero and therefore have no outgoing edges.
  std::vector<Index> zero_codes;
};

// t-nearest-neighbour graph on normalized codes (one code per column of
// `codes`). Only strictly positive inner products qualify; ties go to the
// lower index. A zero code throws ZeroCode unless `allow_zero_codes`, in
// which case the point is recorded and left without outgoing edges.
inline AffinityGraph build_knn_graph(const Matrix& codes, Index t,
                                     bool allow_zero_codes = false,
                                     unsigned threads = 1) {
  require(t >= 1, Errc::kInvalidArgument, "t must be at least 1");
  const Index n = codes.cols();
  AffinityGraph graph;
  graph.size = n;
  graph.neighbors.resize(static_cast<std::size_t>(n));

  Matrix normalized = codes;
  std::vector<char> zero(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    const double norm = codes.col(j).norm();
    if (norm < kZeroCodeNorm) {
      require(allow_zero_codes, Errc::kZeroCode,
              "code of point " + std::to_string(j) + " is zero",
              static_cast<std::size_t>(j));
      zero[static_cast<std::size_t>(j)] = 1;
      graph.zero_codes.push_back(j);
      normalized.col(j).setZero();
    } else {
      normalized.col(j) /= norm;
    }
  }

  const Matrix similarity = normalized.transpose() * normalized;
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t u) {
    const Index i = static_cast<Index>(u);
    if (zero[u]) return;
    std::vector<Index> candidates;
    for (Index j = 0; j < n; ++j)
      if (j != i && similarity(i, j) > 0.0) candidates.push_back(j);
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(t),
                                            candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(), [&](Index a, Index b) {
                        const double sa = similarity(i, a);
                        const double sb = similarity(i, b);
                        return sa > sb || (sa == sb && a < b);
                      });
    candidates.resize(keep);
    graph.neighbors[u] = std::move(candidates);
  });

  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < n; ++i) {
    for (Index j : graph.neighbors[static_cast<std::size_t>(i)]) {
      triplets.emplace_back(i, j, 1.0);
      triplets.emplace_back(j, i, 1.0);
    }
  }
  graph.affinity.resize(n, n);
  graph.affinity.setFromTriplets(triplets.begin(), triplets.end());
  graph.affinity.makeCompressed();
  return graph;
}

inline AffinityGraph build_knn_graph(const std::vector<SparseCode>& codes,
                                     Index t, bool allow_zero_codes = false,
                                     unsigned threads = 1) {
  const Index m = codes.empty() ? 0 : codes.front().coeffs.size();
  Matrix stacked(m, static_cast<Index>(codes.size()));
  for (std::size_t j = 0; j < codes.size(); ++j) {
    require(codes[j].coeffs.size() == m, Errc::kBadDim,
            "codes must share one dictionary", j);
    stacked.col(static_cast<Index>(j)) = codes[j].coeffs;
  }
  return build_knn_graph(stacked, t, allow_zero_codes, threads);
}

// ---------------------------------------------------------------------------
// k-means on the columns of `points`.

struct KMeansOptions {
  int restarts = 10;
  int max_iter = 300;
  double rel_tol = 1e-9;
};

struct KMeansResult {
  Labels labels;
  Matrix centers;
  double inertia = 0.0;
};

namespace detail {

inline Index nearest_center(const Matrix& centers, const auto& x, double& dist) {
  Index best = 0;
  dist = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centers.cols(); ++c) {
    const double d = (centers.col(c) - x).squaredNorm();
    if (d < dist) {
      dist = d;
      best = c;
    }
  }
  return best;
}

inline Matrix kmeanspp_init(const Matrix& points, Index k, CounterRng& rng) {
  const Index n = points.cols();
  Matrix centers(points.rows(), k);
  centers.col(0) = points.col(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector d2(n);
  for (Index j = 0; j < n; ++j) d2(j) = (points.col(j) - centers.col(0)).squaredNorm();
  for (Index c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index j = 0; j < n; ++j) {
        acc += d2(j);
        if (acc > target) {
          pick = j;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.col(c) = points.col(pick);
    for (Index j = 0; j < n; ++j)
      d2(j) = std::min(d2(j), (points.col(j) - centers.col(c)).squaredNorm());
  }
  return centers;
}

inline KMeansResult lloyd(const Matrix& points, Matrix centers,
                          const KMeansOptions& options) {
  const Index n = points.cols();
  const Index k = centers.cols();
  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), 0);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iter; ++iter) {
    double inertia = 0.0;
    Vector dist(n);
    for (Index j = 0; j < n; ++j) {
      double d = 0.0;
      result.labels[static_cast<std::size_t>(j)] =
          static_cast<int>(nearest_center(centers, points.col(j), d));
      dist(j) = d;
      inertia += d;
    }
    result.inertia = inertia;
    if (previous - inertia <= options.rel_tol * std::max(inertia, 1e-300)) break;
    previous = inertia;

    Matrix sums = Matrix::Zero(points.rows(), k);
    std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
    for (Index j = 0; j < n; ++j) {
      const int l = result.labels[static_cast<std::size_t>(j)];
      sums.col(l) += points.col(j);
      ++sizes[static_cast<std::size_t>(l)];
    }
    for (Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        centers.col(c) = sums.col(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      } else {
        // Empty cluster: move it to the point farthest from its center.
        Index far = 0;
        dist.maxCoeff(&far);
        centers.col(c) = points.col(far);
        dist(far) = 0.0;
      }
    }
  }
  result.centers = std::move(centers);
  return result;
}

// Renames clusters in order of first appearance.
inline Labels canonical_labels(const Labels& labels) {
  std::vector<int> rename;
  Labels out(labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int l = labels[j];
    if (static_cast<std::size_t>(l) >= rename.size()) rename.resize(l + 1, -1);
    if (rename[l] < 0)
      rename[l] = static_cast<int>(std::count_if(rename.begin(), rename.end(),
                                                 [](int r) { return r >= 0; }));
    out[j] = rename[l];
  }
  return out;
}

}  // namespace detail

inline KMeansResult kmeans(const Matrix& points, Index k, std::uint64_t seed,
                           const KMeansOptions& options = {}) {
  require(k >= 1 && k <= points.cols(), Errc::kInvalidArgument,
          "k-means needs 1 <= k <= number of points");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    CounterRng rng(seed, 0x6B6D65616E73ULL + static_cast<std::uint64_t>(r));
    KMeansResult run =
        detail::lloyd(points, detail::kmeanspp_init(points, k, rng), options);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

// ---------------------------------------------------------------------------

struct ClusterAssignment {
  Labels labels;
  int n_clusters = 0;
  std::vector<Index> isolated;  // zero-degree vertices given degree 1
};

// Normalized spectral clustering: eigenvectors of the n smallest eigenvalues
// of L = I - D^{-1/2} A D^{-1/2}, rows normalized, then seeded k-means.
inline ClusterAssignment spectral_cluster(const AffinityGraph& graph,
                                          int n_clusters, std::uint64_t seed,
                                          const KMeansOptions& options = {}) {
  require(n_clusters >= 1, Errc::kInvalidArgument, "n_clusters must be >= 1");
  const Index n = graph.size;
  require(n_clusters <= n, Errc::kInvalidArgument,
          "n_clusters cannot exceed the number of points");
  require(graph.affinity.nonZeros() > 0, Errc::kEmptyGraph,
          "affinity graph has no edges");

  ClusterAssignment out;
  out.n_clusters = n_clusters;
  const Matrix affinity = Matrix(graph.affinity);
  Vector inv_sqrt_degree(n);
  for (Index i = 0; i < n; ++i) {
    double degree = affinity.row(i).sum();
    if (degree <= 0.0) {
      out.isolated.push_back(i);
      degree = 1.0;
    }
    inv_sqrt_degree(i) = 1.0 / std::sqrt(degree);
  }
  if (n_clusters == 1) {
    out.labels.assign(static_cast<std::size_t>(n), 0);
    return out;
  }

  Matrix laplacian = -(inv_sqrt_degree.asDiagonal() * affinity *
                       inv_sqrt_degree.asDiagonal());
  laplacian.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(laplacian);
  require(eig.info() == Eigen::Success, Errc::kNoConvergence,
          "Laplacian eigendecomposition failed");

  Matrix embedding = eig.eigenvectors().leftCols(n_clusters).transpose();
  for (Index j = 0; j < n; ++j) {
    const double norm = embedding.col(j).norm();
    if (norm > 0.0) embedding.col(j) /= norm;
  }
  const KMeansResult km = kmeans(embedding, n_clusters, seed, options);
  out.labels = detail::canonical_labels(km.labels);
  return out;
}

// ---------------------------------------------------------------------------

enum class SelectionMethod { kFfs, kFfsNaive, kRandom };

struct EscParams {
  double lambda = 100.0;
  Index k = 0;
  Index t = 3;
  int n_clusters = 2;
  std::uint64_t seed = 0;
  SelectionMethod method = SelectionMethod::kFfs;
  LassoOptions lasso;
  std::optional<Index> first_index;
  unsigned threads = 1;
};

struct EscResult {
  ExemplarSet exemplars;
  std::vector<SparseCode> codes;
  AffinityGraph graph;
  ClusterAssignment assignment;
  std::vector<std::string> warnings;
};

inline ExemplarSet select_exemplars(const DataMatrix& data, double lambda,
                                    Index k, std::uint64_t seed,
                                    SelectionMethod method,
                                    const FfsOptions& options = {}) {
  switch (method) {
    case SelectionMethod::kFfs: return ffs_lazy(data, lambda, k, seed, options);
    case SelectionMethod::kFfsNaive: return ffs_naive(data, lambda, k, seed, options);
    case SelectionMethod::kRandom: {
      ExemplarSet out = select_random(data, k, seed);
      out.lambda = lambda;
      return out;
    }
  }
  throw Error(Errc::kInvalidArgument, "unknown selection method");
}

// Exemplar-based subspace clustering: select exemplars, code every point
// over them, link each code to its t most similar positive neighbours, and
// cluster the symmetrized graph spectrally. Points whose code vanishes are
// attached to the cluster of the exemplar with the largest |<x_j, x_e>|.
inline EscResult esc_pipeline(const DataMatrix& data, const EscParams& params) {
  require(params.k >= 1, Errc::kInvalidArgument, "k must be at least 1");
  EscResult result;
  FfsOptions ffs_options{params.lasso, params.first_index};
  result.exemplars = select_exemplars(data, params.lambda, params.k,
                                      params.seed, params.method, ffs_options);
  const Matrix dictionary = data.columns(result.exemplars.indices);
  result.codes = solve_lasso_batch(dictionary, data.points(), params.lambda,
                                   params.lasso, params.threads);
  result.graph = build_knn_graph(result.codes, params.t, true, params.threads);
  result.assignment = spectral_cluster(result.graph, params.n_clusters,
                                       params.seed);

  for (Index j : result.graph.zero_codes) {
    const Vector inner = dictionary.transpose() * data.point(j);
    Index best = 0;
    inner.cwiseAbs().maxCoeff(&best);
    const Index exemplar = result.exemplars.indices[static_cast<std::size_t>(best)];
    result.assignment.labels[static_cast<std::size_t>(j)] =
        result.assignment.labels[static_cast<std::size_t>(exemplar)];
    result.warnings.push_back("point " + std::to_string(j) +
                              " has a zero code; attached to exemplar " +
                              std::to_string(exemplar));
  }
  return result;
}

}  // namespace exsel

#endif  // EXSEL_CLUSTER_HPP_
