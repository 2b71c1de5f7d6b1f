#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dphc/affinity.hpp"
#include "dphc/dendrogram.hpp"

namespace dphc {

struct TreeEdge {
  VertexId parent = 0;
  VertexId child = 0;
  double variance = 0.0;
};

// Law of the positive multiplicative factors: gamma = exp(mu + sigma * N(0,1)).
// sigma = 0 gives the constant exp(mu).
struct GammaLaw {
  double log_mean = 0.0;
  double log_sd = 0.25;
};

// Latent tree model: Gaussian increments along edges, samples drawn at the
// support vertices with isotropic noise sigma.
struct TreeSpec {
  double root_variance = 0.0;
  std::vector<TreeEdge> edges;
  std::vector<VertexId> support;
  std::vector<double> weights;
  double sigma = 0.0;
  GammaLaw gamma;
  // Only needed for a tree without edges; otherwise derived.
  std::optional<VertexId> root;

  // Throws ValidationError unless edges form a rooted tree, the support is a
  // non-empty subset of vertices and the weights are a probability vector.
  void check() const;
  std::vector<VertexId> vertices() const;  // parents before children
  VertexId root_vertex() const;
};

// h(v) = alpha(v, v): root variance plus the variances along the root path.
std::map<VertexId, double> true_heights(const TreeSpec& spec);

// The model tree with heights h(v).
Dendrogram true_dendrogram(const TreeSpec& spec);

struct SampleSet {
  DataMatrix y;
  LeafAssignment z;
  AffinityMatrix true_alpha;  // merge heights of (z_i, z_j); diagonal h(z_i)
  Dendrogram truth;
  std::uint64_t seed = 0;
};

// Y_i = X(Z_i) + sigma E_i with Z_i drawn from the support weights.
//
// Random numbers are addressed, not drawn in sequence: the increment of
// vertex v in dimension j is normal number j of stream (vertex, v), noise
// E_ij is number j of stream (noise, i) and Z_i comes from stream
// (assignment, i). Output is therefore identical however the work is split.
SampleSet sample_additive(const TreeSpec& spec, std::size_t n, std::size_t p, std::uint64_t seed);

// Y_i = gamma_i X(i) at the leaves, one sample per support vertex (which must
// be exactly the leaves, each with h = 1). The X draws use the same streams
// as sample_additive and, like gamma, are rounded to single precision so that
// every product gamma_i X_j(i) is exact in double precision.
SampleSet sample_multiplicative(const TreeSpec& spec, std::size_t p, std::uint64_t seed);

// Same as sample_multiplicative with the realized gammas replaced by `gamma`.
// Products stay exact only for factors representable in single precision.
SampleSet sample_multiplicative_with(const TreeSpec& spec, std::size_t p, std::uint64_t seed,
                                     const std::vector<double>& gamma);

// Rounded gamma draws used by sample_multiplicative.
std::vector<double> draw_gammas(const TreeSpec& spec, std::size_t count, std::uint64_t seed);

// Divides every variance by the largest leaf height, then lengthens the leaf
// edges so that every leaf sits at height 1.
TreeSpec normalize_leaf_heights(const TreeSpec& spec);

// Rank of the support affinity matrix [alpha(u, v)]_{u, v in support}.
std::size_t support_affinity_rank(const TreeSpec& spec);

// The 8-vertex simulation tree: support {1..5} with uniform weights, edges
// 6->1 (5), 6->2 (2), 6->3 (2), 7->4 (0.5), 7->5 (7), 8->6 (2), 8->7 (1),
// root 8 with variance 1 and noise sigma 1.
TreeSpec builtin_tree_e1();

}  // namespace dphc
