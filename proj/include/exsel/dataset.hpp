#ifndef EXSEL_DATASET_HPP_
#define EXSEL_DATASET_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "exsel/error.hpp"
#include "exsel/random.hpp"

namespace exsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;
using Index = Eigen::Index;

// Column-stacked samples in R^D with optional integer class labels.
// Immutable after construction.
class DataMatrix {
 public:
  DataMatrix() = default;

  explicit DataMatrix(Matrix points, std::optional<Labels> labels = std::nullopt)
      : points_(std::move(points)), labels_(std::move(labels)) {
    require(points_.rows() >= 1 && points_.cols() >= 1, Errc::kBadDim,
            "data matrix must have D >= 1 and N >= 1");
    if (labels_) {
      require(static_cast<Index>(labels_->size()) == points_.cols(),
              Errc::kLengthMismatch, "label count must equal point count");
    }
  }

  const Matrix& points() const { return points_; }
  const std::optional<Labels>& labels() const { return labels_; }
  bool has_labels() const { return labels_.has_value(); }

  Index dim() const { return points_.rows(); }
  Index count() const { return points_.cols(); }

  auto point(Index j) const { return points_.col(j); }

  // Gathers the given columns, in order, into a D x |indices| matrix.
  template <typename IndexRange>
  Matrix columns(const IndexRange& indices) const {
    Matrix out(dim(), static_cast<Index>(std::size(indices)));
    Index c = 0;
    for (auto j : indices) out.col(c++) = points_.col(static_cast<Index>(j));
    return out;
  }

 private:
  Matrix points_;
  std::optional<Labels> labels_;
};

inline constexpr double kZeroColumnNorm = 1e-14;

inline DataMatrix normalize_columns(const DataMatrix& m) {
  Matrix out = m.points();
  for (Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    require(norm >= kZeroColumnNorm, Errc::kZeroColumn,
            "column " + std::to_string(j) + " has zero norm",
            static_cast<std::size_t>(j));
    // Columns already unit to rounding are left untouched, which makes the
    // operation idempotent bit for bit.
    if (std::abs(norm - 1.0) > 4.0 * std::numeric_limits<double>::epsilon())
      out.col(j) /= norm;
  }
  return DataMatrix(std::move(out), m.labels());
}

// Mean-subtracts the columns and projects them onto the leading
// `target_dim` principal directions (descending variance). Each direction
// is sign-fixed so its largest-magnitude entry is positive.
inline DataMatrix pca_project(const DataMatrix& m, Index target_dim) {
  require(target_dim >= 1 && target_dim <= std::min(m.dim(), m.count()),
          Errc::kBadDim,
          "target_dim " + std::to_string(target_dim) +
              " outside [1, min(D, N)]");
  const Vector mean = m.points().rowwise().mean();
  const Matrix centered = m.points().colwise() - mean;
  const Matrix scatter = centered * centered.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
  require(eig.info() == Eigen::Success, Errc::kNoConvergence,
          "eigendecomposition of the scatter matrix failed");

  // Eigen returns ascending eigenvalues; take the trailing block reversed.
  const Index d = m.dim();
  Matrix basis(d, target_dim);
  for (Index c = 0; c < target_dim; ++c) {
    Vector dir = eig.eigenvectors().col(d - 1 - c);
    Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0) dir = -dir;
    basis.col(c) = dir;
  }
  return DataMatrix(basis.transpose() * centered, m.labels());
}

struct SubspaceSpec {
  Index ambient_dim = 0;
  std::vector<Index> dims;
  std::vector<Index> counts;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  // Random subspaces are independent with probability one when this holds.
  bool independent() const {
    return std::accumulate(dims.begin(), dims.end(), Index{0}) <= ambient_dim;
  }
};

inline void validate(const SubspaceSpec& spec) {
  require(spec.ambient_dim >= 1, Errc::kInvalidArgument,
          "ambient dimension must be positive");
  require(!spec.dims.empty(), Errc::kInvalidArgument,
          "at least one subspace is required");
  require(spec.dims.size() == spec.counts.size(), Errc::kLengthMismatch,
          "dims and counts must have the same length");
  require(spec.noise_sigma >= 0.0, Errc::kInvalidArgument,
          "noise_sigma must be nonnegative");
  for (std::size_t l = 0; l < spec.dims.size(); ++l) {
    require(spec.dims[l] >= 1 && spec.dims[l] <= spec.ambient_dim,
            Errc::kInvalidArgument,
            "subspace " + std::to_string(l) + " dimension must lie in [1, D]", l);
    require(spec.counts[l] >= spec.dims[l], Errc::kInvalidArgument,
            "subspace " + std::to_string(l) +
                " needs at least as many points as its dimension", l);
  }
}

// Orthonormal basis of a uniformly oriented d-dimensional subspace of R^D.
inline Matrix random_orthonormal_basis(Index ambient_dim, Index d,
                                       CounterRng& rng) {
  Matrix gaussian(ambient_dim, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < ambient_dim; ++r) gaussian(r, c) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  return qr.householderQ() * Matrix::Identity(ambient_dim, d);
}

struct SyntheticData {
  DataMatrix data;
  std::vector<Matrix> bases;
};

inline SyntheticData synth_union_of_subspaces_with_bases(const SubspaceSpec& spec) {
  validate(spec);
  CounterRng rng(spec.seed);
  const Index total =
      std::accumulate(spec.counts.begin(), spec.counts.end(), Index{0});
  Matrix points(spec.ambient_dim, total);
  Labels labels;
  labels.reserve(static_cast<std::size_t>(total));
  std::vector<Matrix> bases;

  Index col = 0;
  for (std::size_t l = 0; l < spec.dims.size(); ++l) {
    const Index d = spec.dims[l];
    Matrix basis = random_orthonormal_basis(spec.ambient_dim, d, rng);
    for (Index p = 0; p < spec.counts[l]; ++p) {
      Vector a(d);
      double norm = 0.0;
      do {
        for (Index i = 0; i < d; ++i) a(i) = rng.normal();
        norm = a.norm();
      } while (norm < 1e-12);
      a /= norm;
      Vector x = basis * a;
      if (spec.noise_sigma > 0.0)
        for (Index r = 0; r < spec.ambient_dim; ++r)
          x(r) += spec.noise_sigma * rng.normal();
      points.col(col++) = x / x.norm();
      labels.push_back(static_cast<int>(l));
    }
    bases.push_back(std::move(basis));
  }
  return {DataMatrix(std::move(points), std::move(labels)), std::move(bases)};
}

inline DataMatrix synth_union_of_subspaces(const SubspaceSpec& spec) {
  return synth_union_of_subspaces_with_bases(spec).data;
}

// ---------------------------------------------------------------------------
// CSV: one sample per row, features as columns, optional trailing integer
// label column. Blank lines and lines starting with '#' are skipped.

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace detail

inline DataMatrix parse_csv(std::istream& in, bool with_labels) {
  std::vector<std::vector<double>> rows;
  Labels labels;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = detail::split_fields(view);
    if (rows.empty()) {
      width = fields.size();
      require(!with_labels || width >= 2, Errc::kParseError,
              "labelled rows need at least one feature column", line_no);
    }
    require(fields.size() == width, Errc::kRaggedRows,
            "line " + std::to_string(line_no) + " has " +
                std::to_string(fields.size()) + " fields, expected " +
                std::to_string(width),
            line_no);
    const std::size_t n_features = with_labels ? width - 1 : width;
    std::vector<double> row(n_features);
    for (std::size_t c = 0; c < n_features; ++c) {
      require(detail::parse_number(fields[c], row[c]), Errc::kParseError,
              "line " + std::to_string(line_no) + ": bad number '" +
                  std::string(fields[c]) + "'",
              line_no);
    }
    if (with_labels) {
      int label = 0;
      require(detail::parse_number(fields.back(), label), Errc::kParseError,
              "line " + std::to_string(line_no) + ": bad label '" +
                  std::string(fields.back()) + "'",
              line_no);
      labels.push_back(label);
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), Errc::kParseError, "no data rows", line_no);

  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(rows.front().size());
  Matrix points(d, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < d; ++i) points(i, j) = rows[j][i];
  if (with_labels) return DataMatrix(std::move(points), std::move(labels));
  return DataMatrix(std::move(points));
}

inline DataMatrix load_csv(const std::string& path, bool with_labels = false) {
  std::ifstream in(path);
  require(in.good(), Errc::kIo, "cannot open '" + path + "' for reading");
  return parse_csv(in, with_labels);
}

inline void write_csv(std::ostream& out, const DataMatrix& m,
                      bool with_labels = false) {
  require(!with_labels || m.has_labels(), Errc::kInvalidArgument,
          "label column requested but data has no labels");
  char buf[32];
  for (Index j = 0; j < m.count(); ++j) {
    for (Index i = 0; i < m.dim(); ++i) {
      if (i) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", m.points()(i, j));
      out << buf;
    }
    if (with_labels) out << ',' << (*m.labels())[static_cast<std::size_t>(j)];
    out << '\n';
  }
}

inline void save_csv(const DataMatrix& m, const std::string& path,
                     bool with_labels = false) {
  std::ofstream out(path);
  require(out.good(), Errc::kIo, "cannot open '" + path + "' for writing");
  write_csv(out, m, with_labels);
  require(out.good(), Errc::kIo, "write to '" + path + "' failed");
}

// Label files hold one integer per line.
inline Labels parse_labels(std::istream& in) {
  Labels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    int label = 0;
    require(detail::parse_number(view, label), Errc::kParseError,
            "line " + std::to_string(line_no) + ": bad label", line_no);
    labels.push_back(label);
  }
  return labels;
}

inline Labels load_labels(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::kIo, "cannot open '" + path + "' for reading");
  return parse_labels(in);
}

inline void save_labels(const Labels& labels, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), Errc::kIo, "cannot open '" + path + "' for writing");
  for (int l : labels) out << l << '\n';
}

}  // namespace exsel

#endif  // EXSEL_DATASET_HPP_
