#ifndef EXSEL_CLASSIFY_HPP_
#define EXSEL_CLASSIFY_HPP_

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "exsel/dataset.hpp"
#include "exsel/error.hpp"
#include "exsel/lasso.hpp"
#include "exsel/parallel.hpp"

namespace exsel {

// Exemplars with known class labels; the supervision for src_classify.
class LabeledExemplars {
 public:
  // `classes` lists every class that must be represented; pass an empty set
  // to take the classes present in `class_of`.
  LabeledExemplars(std::vector<Index> indices, std::map<Index, int> class_of,
                   std::set<int> classes = {})
      : indices_(std::move(indices)),
        class_of_(std::move(class_of)),
        classes_(std::move(classes)) {
    std::set<Index> seen;
    for (Index i : indices_) {
      require(seen.insert(i).second, Errc::kInvalidArgument,
              "exemplar " + std::to_string(i) + " listed twice",
              static_cast<std::size_t>(i));
      require(class_of_.count(i) == 1, Errc::kInvalidArgument,
              "exemplar " + std::to_string(i) + " has no class",
              static_cast<std::size_t>(i));
    }
    require(class_of_.size() == indices_.size(), Errc::kInvalidArgument,
            "class map has entries for non-exemplars");
    std::set<int> present;
    for (const auto& [index, cls] : class_of_) present.insert(cls);
    if (classes_.empty()) classes_ = present;
    for (int cls : classes_)
      require(present.count(cls) == 1, Errc::kNoExemplarsForClass,
              "class " + std::to_string(cls) + " has no exemplars",
              static_cast<std::size_t>(cls < 0 ? 0 : cls));
    for (int cls : present)
      require(classes_.count(cls) == 1, Errc::kInvalidArgument,
              "exemplar class " + std::to_string(cls) + " not in class list");
  }

  // Labels taken from the ground truth of the selected points.
  static LabeledExemplars from_labels(const std::vector<Index>& indices,
                                      const Labels& labels) {
    std::map<Index, int> class_of;
    for (Index i : indices) {
      require(i >= 0 && static_cast<std::size_t>(i) < labels.size(),
              Errc::kInvalidArgument, "exemplar index out of range");
      class_of[i] = labels[static_cast<std::size_t>(i)];
    }
    return LabeledExemplars(indices, std::move(class_of));
  }

  const std::vector<Index>& indices() const { return indices_; }
  const std::map<Index, int>& class_of() const { return class_of_; }
  const std::set<int>& classes() const { return classes_; }
  int label(Index i) const { return class_of_.at(i); }

 private:
  std::vector<Index> indices_;
  std::map<Index, int> class_of_;
  std::set<int> classes_;
};

struct ClassifyResult {
  Labels labels;
  // residual_norms(c, j) = ||x_j - sum_{i in class c} c_ij x_i||, rows in
  // ascending class order.
  Matrix residual_norms;
  std::vector<int> class_ids;
  std::vector<SparseCode> codes;
};

// Per-class residual norms of one point given its code over `dictionary`,
// whose column i belongs to class column_class[i] (an index into the
// ascending class list).
inline Vector class_residual_norms(const Matrix& dictionary,
                                   const std::vector<int>& column_class,
                                   const Vector& x, const Vector& coeffs,
                                   Index n_classes) {
  Matrix partial = x.replicate(1, n_classes);
  for (Index i = 0; i < dictionary.cols(); ++i) {
    if (coeffs(i) != 0.0)
      partial.col(column_class[static_cast<std::size_t>(i)]) -=
          coeffs(i) * dictionary.col(i);
  }
  return partial.colwise().norm().transpose();
}

// Sparse-representation classification over labeled exemplars: every point
// is coded once over all exemplars, then assigned to the class whose
// exemplars alone leave the smallest residual (lowest class id on ties).
// Exemplars keep their given labels.
inline ClassifyResult src_classify(const DataMatrix& data,
                                   const LabeledExemplars& exemplars,
                                   double lambda,
                                   const LassoOptions& options = {},
                                   unsigned threads = 1) {
  require(lambda > 1.0, Errc::kInvalidArgument, "lambda must exceed 1");
  require(!exemplars.indices().empty(), Errc::kNoExemplarsForClass,
          "no labeled exemplars");
  for (Index i : exemplars.indices())
    require(i >= 0 && i < data.count(), Errc::kInvalidArgument,
            "exemplar index out of range", static_cast<std::size_t>(i));

  ClassifyResult result;
  result.class_ids.assign(exemplars.classes().begin(), exemplars.classes().end());
  const Index n_classes = static_cast<Index>(result.class_ids.size());
  std::vector<int> column_class;
  for (Index i : exemplars.indices()) {
    const auto pos = std::lower_bound(result.class_ids.begin(),
                                      result.class_ids.end(), exemplars.label(i));
    column_class.push_back(static_cast<int>(pos - result.class_ids.begin()));
  }

  const Matrix dictionary = data.columns(exemplars.indices());
  result.codes = solve_lasso_batch(dictionary, data.points(), lambda, options,
                                   threads);
  result.residual_norms.resize(n_classes, data.count());
  result.labels.assign(static_cast<std::size_t>(data.count()), 0);
  parallel_for(static_cast<std::size_t>(data.count()), threads,
               [&](std::size_t u) {
                 const Index j = static_cast<Index>(u);
                 const Vector norms = class_residual_norms(
                     dictionary, column_class, data.point(j),
                     result.codes[u].coeffs, n_classes);
                 result.residual_norms.col(j) = norms;
                 Index best = 0;
                 for (Index c = 1; c < n_classes; ++c)
                   if (norms(c) < norms(best)) best = c;
                 result.labels[u] = result.class_ids[static_cast<std::size_t>(best)];
               });
  for (const auto& [index, cls] : exemplars.class_of())
    result.labels[static_cast<std::size_t>(index)] = cls;
  return result;
}

}  // namespace exsel

#endif  // EXSEL_CLASSIFY_HPP_
