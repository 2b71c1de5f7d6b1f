#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dphc/affinity.hpp"
#include "dphc/agglomerate.hpp"
#include "dphc/eval.hpp"
#include "dphc/spectral.hpp"

namespace dphc {

// What the clustering runs on: dot-product or cosine affinities (maximized),
// or a distance (minimized).
enum class Measure { dot, cosine, euclidean, sqeuclidean, manhattan };

std::string_view to_string(Measure m);

struct Method {
  Measure measure = Measure::dot;
  Linkage linkage = Linkage::average;

  // "dot", "cosine", "euclidean", "manhattan", "ward", optionally prefixed
  // "complete-" or "single-" (not for ward).
  static Method parse(std::string_view name);
  std::string name() const;
  Objective objective() const;
};

// Throws ValidationError for combinations the engine cannot run, such as ward
// on anything but squared Euclidean distances.
void check_compatible(Measure measure, Linkage linkage);

// The matrix that `measure` clusters. For dot, `ambient_p` divides the
// inner products (it is the column count for raw data and the original
// dimension for PCA scores).
AffinityMatrix measure_matrix(const DataMatrix& y, Measure measure, std::size_t ambient_p);

ClusterResult run_method(const DataMatrix& y, const Method& method, std::size_t ambient_p,
                         Engine engine = Engine::nn_chain);

// PCA scores packed as a data matrix.
DataMatrix scores_as_data(const ScoreMatrix& s);

// Ground-truth rankings of a simulated sample: samples sharing a latent
// vertex tie, the rest follow the true tree.
std::vector<TiedRanking> truth_rankings(const Dendrogram& truth, const LeafAssignment& z);

}  // namespace dphc
