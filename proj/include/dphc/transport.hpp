#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dphc {

// Points stored row-major: count() rows of dim() coordinates.
struct PointSetView {
  std::span<const double> coords;
  std::size_t dim = 0;

  std::size_t count() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return coords.subspan(i * dim, dim); }
};

struct TransportSolution {
  double cost = 0.0;
  // flow[i * cols + j], in units of the integer masses passed to the solver.
  std::vector<std::int64_t> flow;
};

// Exact minimum-cost transportation between integer supplies and demands of
// equal total. Successive shortest augmenting paths with Johnson potentials on
// the dense bipartite graph; cost is sum(flow * cost).
TransportSolution solve_transport(std::span<const double> cost, std::size_t rows, std::size_t cols,
                                  std::span<const std::int64_t> supply,
                                  std::span<const std::int64_t> demand);

// Exact 1-Wasserstein distance between the uniform empirical measures on a and
// b under Euclidean ground cost. Sizes may differ.
double wasserstein_distance(PointSetView a, PointSetView b);

}  // namespace dphc
