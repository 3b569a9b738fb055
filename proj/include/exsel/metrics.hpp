#ifndef EXSEL_METRICS_HPP_
#define EXSEL_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "exsel/dataset.hpp"
#include "exsel/error.hpp"
#include "exsel/lasso.hpp"

namespace exsel {

// counts(i, j) = |C_i ∩ G_j| for true classes C (rows) and predicted groups G
// (columns), padded with empty rows/columns to a square n x n table. Label
// values are mapped to rows/columns in ascending order.
struct ContingencyTable {
  Matrix counts;
  std::vector<int> class_ids;
  std::vector<int> group_ids;

  Index n() const { return counts.rows(); }
  double total() const { return counts.sum(); }
};

inline ContingencyTable contingency(const Labels& truth, const Labels& pred) {
  require(truth.size() == pred.size(), Errc::kLengthMismatch,
          "truth and prediction lengths differ");
  ContingencyTable table;
  std::map<int, Index> rows, cols;
  for (int l : truth) rows.emplace(l, 0);
  for (int l : pred) cols.emplace(l, 0);
  Index r = 0, c = 0;
  for (auto& [label, idx] : rows) {
    idx = r++;
    table.class_ids.push_back(label);
  }
  for (auto& [label, idx] : cols) {
    idx = c++;
    table.group_ids.push_back(label);
  }
  const Index n = std::max(r, c);
  table.counts = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < truth.size(); ++j)
    table.counts(rows[truth[j]], cols[pred[j]]) += 1.0;
  return table;
}

// Minimum-cost perfect matching on a square cost matrix (Hungarian method
// with potentials, O(n^3)). Returns assignment[row] = column.
inline std::vector<Index> hungarian_min_cost(const Matrix& cost) {
  require(cost.rows() == cost.cols(), Errc::kBadDim, "cost matrix must be square");
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based internals; p[col] = row matched to col.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> assignment(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j)
    if (p[j] != 0) assignment[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return assignment;
}

// max over permutations pi of sum_i score(i, pi(i)).
inline double max_matching_value(const Matrix& score) {
  if (score.size() == 0) return 0.0;
  const auto assignment = hungarian_min_cost(-score);
  double total = 0.0;
  for (Index i = 0; i < score.rows(); ++i)
    total += score(i, assignment[static_cast<std::size_t>(i)]);
  return total;
}

// Percentage of points correctly labelled under the best relabelling.
inline double clustering_accuracy(const Labels& truth, const Labels& pred) {
  const ContingencyTable table = contingency(truth, pred);
  require(!truth.empty(), Errc::kLengthMismatch, "empty labelling");
  return 100.0 * max_matching_value(table.counts) /
         static_cast<double>(truth.size());
}

// F_ij = 2 p r / (p + r) with p = n_ij / |G_j|, r = n_ij / |C_i|, taken as 0
// when n_ij = 0.
inline Matrix fscore_table(const ContingencyTable& table) {
  const Index n = table.n();
  const Vector class_sizes = table.counts.rowwise().sum();
  const Vector group_sizes = table.counts.colwise().sum().transpose();
  Matrix f = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double nij = table.counts(i, j);
      if (nij <= 0.0) continue;
      const double precision = nij / group_sizes(j);
      const double recall = nij / class_sizes(i);
      f(i, j) = 2.0 * precision * recall / (precision + recall);
    }
  }
  return f;
}

// Class-averaged F-score under the best relabelling, in [0, 100].
inline double clustering_fscore(const Labels& truth, const Labels& pred) {
  const ContingencyTable table = contingency(truth, pred);
  require(!truth.empty(), Errc::kLengthMismatch, "empty labelling");
  return 100.0 * max_matching_value(fscore_table(table)) /
         static_cast<double>(table.n());
}

// 1 - normalized entropy of the per-class exemplar proportions, with the
// logarithm taken in base n (the number of classes). 0 means every class got
// the same number of exemplars, 1 that a single class got all of them.
inline double imbalance(const std::vector<double>& class_counts) {
  double total = 0.0;
  for (double s : class_counts) {
    require(s >= 0.0, Errc::kInvalidArgument, "class counts must be nonnegative");
    total += s;
  }
  require(total > 0.0, Errc::kEmptySelection, "no exemplars selected");
  const std::size_t n = class_counts.size();
  if (n <= 1) return 0.0;
  double entropy = 0.0;
  for (double s : class_counts) {
    if (s <= 0.0) continue;
    const double p = s / total;
    entropy -= p * std::log(p);
  }
  entropy /= std::log(static_cast<double>(n));
  return std::clamp(1.0 - entropy, 0.0, 1.0);
}

// Per-class counts of the selected indices over the classes present in
// `labels` (ascending class id).
inline std::vector<double> selected_class_counts(const std::vector<Index>& selected,
                                                 const Labels& labels) {
  std::map<int, double> counts;
  for (int l : labels) counts.emplace(l, 0.0);
  for (Index i : selected) counts[labels[static_cast<std::size_t>(i)]] += 1.0;
  std::vector<double> out;
  for (const auto& [label, count] : counts) out.push_back(count);
  return out;
}

struct SubspacePreservingReport {
  double rate = 1.0;         // mean same-class share of l1 mass
  Index zero_mass_codes = 0;  // excluded from the mean
};

// For each point, the fraction of its code's l1 mass placed on exemplars
// from its own class, averaged over points with nonzero codes.
inline SubspacePreservingReport subspace_preserving_rate(
    const std::vector<SparseCode>& codes, const Labels& exemplar_labels,
    const Labels& point_labels) {
  require(codes.size() == point_labels.size(), Errc::kLengthMismatch,
          "one code per labelled point required");
  SubspacePreservingReport report;
  double sum = 0.0;
  Index counted = 0;
  for (std::size_t j = 0; j < codes.size(); ++j) {
    const Vector& c = codes[j].coeffs;
    require(static_cast<std::size_t>(c.size()) == exemplar_labels.size(),
            Errc::kLengthMismatch, "code length must match exemplar count", j);
    double total = 0.0, same = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
      const double mass = std::abs(c(i));
      total += mass;
      if (exemplar_labels[static_cast<std::size_t>(i)] == point_labels[j]) same += mass;
    }
    if (total == 0.0) {
      ++report.zero_mass_codes;
      continue;
    }
    sum += same / total;
    ++counted;
  }
  if (counted > 0) report.rate = sum / static_cast<double>(counted);
  return report;
}

}  // namespace exsel

#endif  // EXSEL_METRICS_HPP_
