#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "dphc/affinity.hpp"

namespace dphc {

// Uncentered PCA scores: row i is V^T Y_i, V holding the top-r orthonormal
// eigenvectors of sum_i Y_i Y_i^T. Decomposes the n x n Gram matrix when
// n <= p and the p x p second-moment matrix otherwise. Score signs are not
// normalized; only their dot products are meaningful.
ScoreMatrix pc_scores(const DataMatrix& y, std::size_t r);

struct RankSelection {
  std::size_t r_hat = 0;
  std::vector<std::pair<std::size_t, double>> curve;  // (r, d_r)
};

// Values within this relative distance of the minimum count as ties; ties go
// to the smaller rank.
inline constexpr double kRankTieTolerance = 1e-9;

// Data-splitting rank selection. Eigenvectors come from the first ceil(n/2)
// rows, those rows are projected onto the top-r eigenspace, and d_r is the
// exact 1-Wasserstein distance (Euclidean cost in R^p) between the projected
// first half and the raw second half. r ranges over 1..r_max.
RankSelection select_rank_wasserstein(const DataMatrix& y, std::size_t r_max);

// Rows of y in a seeded random order, for callers that want a random split
// instead of the given one.
DataMatrix shuffle_rows(const DataMatrix& y, std::uint64_t seed);

}  // namespace dphc
