#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "dphc/affinity.hpp"
#include "dphc/dendrogram.hpp"

namespace dphc {

enum class Linkage { average, complete, single, ward };
enum class Objective { max_affinity, min_distance };

// nn_chain is the production engine (O(n^2) time and memory). naive rescans
// every active pair at each step (O(n^3)) and is kept as a reference.
enum class Engine { nn_chain, naive };

std::string_view to_string(Linkage linkage);
Linkage linkage_from_string(std::string_view s);

// One merge. Cluster ids follow the usual linkage-matrix convention: samples
// are 0..n-1 and step m creates cluster n + m.
struct MergeStep {
  std::size_t a = 0;
  std::size_t b = 0;
  double value = 0.0;
  std::size_t size = 0;
};

struct MergeTrace {
  std::size_t n = 0;
  std::vector<MergeStep> steps;  // n - 1 entries in merge order
};

struct ClusterResult {
  Dendrogram dendrogram;
  MergeTrace trace;
  // Fraction of negative off-diagonal inputs (affinity objective only).
  double negative_fraction = 0.0;
};

// State handed to an observer after every merge of the naive engine. Slots
// are indexed by the smallest sample in the cluster.
struct MergeSnapshot {
  std::size_t step = 0;
  std::span<const std::size_t> active;
  std::span<const std::vector<std::size_t>> members;  // indexed by slot
  std::span<const double> matrix;                     // n x n, indexed by slot
  std::size_t n = 0;

  double value(std::size_t slot_a, std::size_t slot_b) const { return matrix[slot_a * n + slot_b]; }
};

using MergeObserver = std::function<void(const MergeSnapshot&)>;

// (|u| a_u + |v| a_v) / (|u| + |v|).
double linkage_update(std::size_t u_size, std::size_t v_size, double a_u, double a_v);

// Dot-product agglomeration: repeatedly merge the pair of clusters with the
// largest affinity, average-linkage updates, internal heights equal to the
// merge values and leaf heights max(parent height, self-affinity).
//
// Exact ties are resolved towards the pair whose smallest sample indices are
// lexicographically smallest by the naive engine; the chain engine honours the
// same preference locally and agrees with it on tie-free input.
ClusterResult cluster_dot(const AffinityMatrix& aff, Engine engine = Engine::nn_chain);

// Agglomeration with any of the supported linkages. The matrix mode must
// agree with the objective (affinity with max, distance with min). Ward
// expects squared Euclidean distances. Min-distance dendrograms are
// distance-oriented: heights grow towards the root.
ClusterResult cluster_generic(const AffinityMatrix& mat, Linkage linkage, Objective objective,
                              Engine engine = Engine::nn_chain, const MergeObserver& observer = {});

// Builds the dendrogram for a completed trace; `self` gives the diagonal used
// for leaf heights.
Dendrogram dendrogram_from_trace(const MergeTrace& trace, std::span<const double> self,
                                 Objective objective);

// Samples in cluster `id` of a trace.
std::vector<std::size_t> cluster_members(const MergeTrace& trace, std::size_t id);

// Partition into k clusters by undoing the last k - 1 merges. Blocks are
// sorted by their smallest sample.
std::vector<std::vector<std::size_t>> flat_cut(const MergeTrace& trace, std::size_t k);

// Same, for a dendrogram: vertices are removed starting at the root, in order
// of height distance from the root.
std::vector<std::vector<std::size_t>> flat_cut(const Dendrogram& d, std::size_t k);

}  // namespace dphc
