#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dphc/dendrogram.hpp"
#include "dphc/genmodel.hpp"

namespace dphc {

// Per-sample categorical labels, coarsest level first. Levels need not nest.
struct LabelHierarchy {
  std::vector<std::vector<std::string>> levels;

  std::size_t size() const { return levels.empty() ? 0 : levels.front().size(); }
  // Throws ValidationError unless there is at least one level and all levels
  // have the same length.
  void check() const;
};

// Ranking of the samples other than a reference sample. items are sample
// indices in increasing order; rank[k] is the midrank of items[k] (1 = closest).
struct TiedRanking {
  std::vector<std::size_t> items;
  std::vector<double> rank;

  std::size_t size() const { return items.size(); }
};

// Midranks for items ordered by a closeness key (larger = closer).
TiedRanking midranks(std::vector<std::size_t> items, const std::vector<std::int64_t>& closeness);

// Samples sharing i's finest label come first, then those whose deepest shared
// level is one coarser, and so on; samples sharing no label come last.
TiedRanking rank_from_labels(const LabelHierarchy& h, std::size_t i);

// Samples ordered by how soon they merge with i: the deeper their most recent
// common ancestor with i, the closer. Samples under the same ancestor tie.
// Works for both orientations.
TiedRanking rank_from_dendrogram(const Dendrogram& d, std::size_t i);

// rank_from_dendrogram for every sample, in O(n^2) total.
std::vector<TiedRanking> rank_all_from_dendrogram(const Dendrogram& d);
std::vector<TiedRanking> rank_all_from_labels(const LabelHierarchy& h);

// Tie-corrected Kendall rank correlation, O(k log k). Throws ValidationError
// when the rankings cover different items or when either one ties every item.
double kendall_tau_b(const TiedRanking& x, const TiedRanking& y);
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct TauSummary {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(used)
  std::size_t used = 0;
  std::size_t excluded = 0;  // samples with a degenerate tau_b
};

// Mean and standard error of per-sample tau_b between truth[i] and the
// ranking of sample i in est. Throws ValidationError if every sample is
// degenerate.
TauSummary mean_tau_b(const std::vector<TiedRanking>& truth, const Dendrogram& est);
TauSummary summarize(const std::vector<double>& values, std::size_t excluded);

enum class Estimator { data, pca, cosine };
std::string_view to_string(Estimator e);
Estimator estimator_from_string(std::string_view s);

struct ConvergenceRow {
  std::size_t n = 0;
  std::size_t p = 0;
  Estimator estimator = Estimator::data;
  double mean_err = 0.0;
  double std_err = 0.0;  // standard deviation over seeds
  std::vector<double> errors;
};

struct ConvergenceOptions {
  std::size_t seeds = 100;
  std::uint64_t base_seed = 0;
  // PCA rank; defaults to the rank of the support affinity matrix.
  std::optional<std::size_t> rank;
};

// Max off-diagonal affinity error averaged over simulations at every grid
// point. data and pca draw from the additive model; cosine draws from the
// multiplicative model on the leaf-normalized tree, where n must equal the
// number of leaves. Simulation s uses seed base_seed + s.
std::vector<ConvergenceRow> convergence_experiment(const TreeSpec& spec,
                                                   const std::vector<std::pair<std::size_t, std::size_t>>& grid,
                                                   Estimator estimator, const ConvergenceOptions& options);

// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dphc
