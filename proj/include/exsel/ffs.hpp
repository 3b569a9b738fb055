#ifndef EXSEL_FFS_HPP_
#define EXSEL_FFS_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "exsel/dataset.hpp"
#include "exsel/error.hpp"
#include "exsel/lasso.hpp"
#include "exsel/random.hpp"
#include "exsel/selfrep.hpp"

namespace exsel {

// Farthest-first search: start from a random point and repeatedly add the
// point with the largest self-representation cost against the current set.
// Ties go to the lowest data index everywhere.

struct SelectionStep {
  Index selected = 0;
  double f_value = 0.0;     // cost of `selected` when it was picked
  std::size_t evals = 0;    // solver calls spent in this step
};

struct ExemplarSet {
  std::vector<Index> indices;  // selection order
  Index k = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::vector<SelectionStep> trace;

  std::size_t total_evals() const {
    std::size_t total = 0;
    for (const auto& step : trace) total += step.evals;
    return total;
  }
};

struct FfsOptions {
  LassoOptions lasso;
  std::optional<Index> first_index;  // overrides the seeded first draw
};

namespace detail {

inline void validate_selection(const DataMatrix& data, double lambda, Index k) {
  require(lambda > 1.0, Errc::kInvalidArgument, "lambda must exceed 1");
  require(k >= 1 && k <= data.count(), Errc::kInvalidArgument,
          "k must lie in [1, N]");
}

inline Index first_pick(const DataMatrix& data, std::uint64_t seed,
                        const FfsOptions& options) {
  if (options.first_index) {
    require(*options.first_index >= 0 && *options.first_index < data.count(),
            Errc::kInvalidArgument, "first index out of range");
    return *options.first_index;
  }
  CounterRng rng(seed);
  return static_cast<Index>(rng.below(static_cast<std::uint64_t>(data.count())));
}

inline ExemplarSet start_selection(Index first, Index k, double lambda,
                                   std::uint64_t seed) {
  ExemplarSet out;
  out.k = k;
  out.lambda = lambda;
  out.seed = seed;
  out.indices.push_back(first);
  out.trace.push_back({first, 0.5 * lambda, 0});
  return out;
}

}  // namespace detail

// Exhaustive variant: every iteration evaluates every unselected point.
inline ExemplarSet ffs_naive(const DataMatrix& data, double lambda, Index k,
                             std::uint64_t seed, const FfsOptions& options = {}) {
  detail::validate_selection(data, lambda, k);
  const Index n = data.count();
  const Index first = detail::first_pick(data, seed, options);
  ExemplarSet out = detail::start_selection(first, k, lambda, seed);

  CostTracker tracker(data, lambda, options.lasso);
  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  tracker.add_exemplar(first);
  selected[static_cast<std::size_t>(first)] = 1;

  while (static_cast<Index>(out.indices.size()) < k) {
    const std::size_t before = tracker.evaluations();
    Index best = -1;
    double best_value = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (selected[static_cast<std::size_t>(j)]) continue;
      const double v = tracker.evaluate(j);
      if (best < 0 || v > best_value) {
        best = j;
        best_value = v;
      }
    }
    tracker.add_exemplar(best);
    selected[static_cast<std::size_t>(best)] = 1;
    out.indices.push_back(best);
    out.trace.push_back({best, best_value, tracker.evaluations() - before});
  }
  return out;
}

// Lazy variant. Costs only decrease as the set grows, so a stale value b_j
// bounds the current cost from above. Candidates are scanned in order of
// decreasing b (index breaks ties) and the scan stops once the best fresh
// value dominates the next bound. Returns exactly what ffs_naive returns.
inline ExemplarSet ffs_lazy(const DataMatrix& data, double lambda, Index k,
                            std::uint64_t seed, const FfsOptions& options = {}) {
  detail::validate_selection(data, lambda, k);
  const Index n = data.count();
  const Index first = detail::first_pick(data, seed, options);
  ExemplarSet out = detail::start_selection(first, k, lambda, seed);

  CostTracker tracker(data, lambda, options.lasso);
  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  tracker.add_exemplar(first);
  selected[static_cast<std::size_t>(first)] = 1;

  // Upper bounds against the first exemplar.
  for (Index j = 0; j < n; ++j) tracker.evaluate(j);
  out.trace.front().evals = tracker.evaluations();

  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  while (static_cast<Index>(out.indices.size()) < k) {
    const std::size_t before = tracker.evaluations();
    order.clear();
    for (Index j = 0; j < n; ++j)
      if (!selected[static_cast<std::size_t>(j)]) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return tracker.value(a) > tracker.value(b);
    });

    Index best = -1;
    double max_cost = 0.0;
    for (std::size_t p = 0; p < order.size(); ++p) {
      const Index j = order[p];
      const double v = tracker.evaluate(j);
      if (best < 0 || v > max_cost || (v == max_cost && j < best)) {
        max_cost = v;
        best = j;
      }
      if (p + 1 == order.size()) break;
      // Points after p are bounded by the next stale value. On an exact tie
      // they can only win by index, and equal bounds are sorted by index.
      const Index next = order[p + 1];
      const double bound = tracker.value(next);
      if (max_cost > bound || (max_cost == bound && best < next)) break;
    }
    tracker.add_exemplar(best);
    selected[static_cast<std::size_t>(best)] = 1;
    out.indices.push_back(best);
    out.trace.push_back({best, max_cost, tracker.evaluations() - before});
  }
  return out;
}

// k distinct indices drawn uniformly without replacement (partial
// Fisher-Yates), in draw order.
inline ExemplarSet select_random(const DataMatrix& data, Index k,
                                 std::uint64_t seed) {
  require(k >= 0 && k <= data.count(), Errc::kInvalidArgument,
          "k must lie in [0, N]");
  std::vector<Index> pool(static_cast<std::size_t>(data.count()));
  std::iota(pool.begin(), pool.end(), Index{0});
  CounterRng rng(seed);
  ExemplarSet out;
  out.k = k;
  out.seed = seed;
  for (Index i = 0; i < k; ++i) {
    const auto remaining = static_cast<std::uint64_t>(data.count() - i);
    const auto pick = static_cast<std::size_t>(i) +
                      static_cast<std::size_t>(rng.below(remaining));
    std::swap(pool[static_cast<std::size_t>(i)], pool[pick]);
    out.indices.push_back(pool[static_cast<std::size_t>(i)]);
    out.trace.push_back({out.indices.back(), 0.0, 0});
  }
  return out;
}

}  // namespace exsel

#endif  // EXSEL_FFS_HPP_
