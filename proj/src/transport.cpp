#include "dphc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dphc/affinity.hpp"
#include "dphc/error.hpp"

namespace dphc {

TransportSolution solve_transport(std::span<const double> cost, std::size_t rows, std::size_t cols,
                                  std::span<const std::int64_t> supply,
                                  std::span<const std::int64_t> demand) {
  if (rows == 0 || cols == 0) throw ValidationError("transport problem needs non-empty sides");
  if (cost.size() != rows * cols || supply.size() != rows || demand.size() != cols) {
    throw ValidationError("transport problem dimensions are inconsistent");
  }
  for (double c : cost) {
    if (!std::isfinite(c)) throw NumericError("non-finite transport cost");
  }
  if (std::any_of(supply.begin(), supply.end(), [](auto s) { return s < 0; }) ||
      std::any_of(demand.begin(), demand.end(), [](auto s) { return s < 0; })) {
    throw ValidationError("negative mass in transport problem");
  }
  const std::int64_t total = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  if (total != std::accumulate(demand.begin(), demand.end(), std::int64_t{0})) {
    throw ValidationError("supply and demand totals differ");
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t nodes = rows + cols;  // sources first, then sinks
  std::vector<std::int64_t> flow(rows * cols, 0);
  std::vector<std::int64_t> left(supply.begin(), supply.end());
  std::vector<std::int64_t> need(demand.begin(), demand.end());

  // Potentials keep every residual reduced cost nonnegative.
  std::vector<double> pot(nodes, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double best = kInf;
    for (std::size_t i = 0; i < rows; ++i) best = std::min(best, cost[i * cols + j]);
    pot[rows + j] = best;
  }

  std::vector<double> dist(nodes);
  std::vector<std::int64_t> prev(nodes);
  std::vector<char> done(nodes);
  std::int64_t remaining = total;
  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < rows; ++i) {
      if (left[i] > 0) dist[i] = 0.0;
    }
    for (;;) {
      std::size_t u = nodes;
      double du = kInf;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < du) {
          du = dist[v];
          u = v;
        }
      }
      if (u == nodes) break;
      done[u] = 1;
      if (u < rows) {
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t v = rows + j;
          if (done[v]) continue;
          const double rc = std::max(0.0, cost[u * cols + j] + pot[u] - pot[v]);
          if (du + rc < dist[v]) {
            dist[v] = du + rc;
            prev[v] = static_cast<std::int64_t>(u);
          }
        }
      } else {
        const std::size_t j = u - rows;
        for (std::size_t i = 0; i < rows; ++i) {
          if (done[i] || flow[i * cols + j] == 0) continue;
          const double rc = std::max(0.0, -cost[i * cols + j] + pot[u] - pot[i]);
          if (du + rc < dist[i]) {
            dist[i] = du + rc;
            prev[i] = static_cast<std::int64_t>(u);
          }
        }
      }
    }

    std::size_t target = nodes;
    for (std::size_t j = 0; j < cols; ++j) {
      if (need[j] > 0 && (target == nodes || dist[rows + j] < dist[target])) target = rows + j;
    }
    if (target == nodes || dist[target] == kInf) throw NumericError("transport solver found no augmenting path");

    double reach = 0.0;
    for (double d : dist) {
      if (d < kInf) reach = std::max(reach, d);
    }
    for (std::size_t v = 0; v < nodes; ++v) pot[v] += dist[v] < kInf ? dist[v] : reach;

    // Bottleneck along the path back to a source with spare supply.
    std::int64_t push = need[target - rows];
    std::size_t v = target;
    while (prev[v] >= 0) {
      const std::size_t u = static_cast<std::size_t>(prev[v]);
      if (u >= rows) push = std::min(push, flow[v * cols + (u - rows)]);  // sink -> source cancels flow
      v = u;
    }
    push = std::min(push, left[v]);

    v = target;
    while (prev[v] >= 0) {
      const std::size_t u = static_cast<std::size_t>(prev[v]);
      if (u < rows) {
        flow[u * cols + (v - rows)] += push;
      } else {
        flow[v * cols + (u - rows)] -= push;
      }
      v = u;
    }
    left[v] -= push;
    need[target - rows] -= push;
    remaining -= push;
  }

  TransportSolution out;
  out.flow = std::move(flow);
  for (std::size_t k = 0; k < out.flow.size(); ++k) {
    out.cost += static_cast<double>(out.flow[k]) * cost[k];
  }
  return out;
}

double wasserstein_distance(PointSetView a, PointSetView b) {
  if (a.count() == 0 || b.count() == 0) throw ValidationError("wasserstein_distance needs non-empty point sets");
  if (a.dim != b.dim) throw ValidationError("point sets live in different dimensions");
  const std::size_t na = a.count();
  const std::size_t nb = b.count();
  std::vector<double> cost(na * nb);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      cost[i * nb + j] = std::sqrt(detail::blocked_sq_distance(a.point(i), b.point(j)));
    }
  }
  // Uniform weights 1/na and 1/nb scaled to integers.
  const auto g = std::gcd(na, nb);
  std::vector<std::int64_t> supply(na, static_cast<std::int64_t>(nb / g));
  std::vector<std::int64_t> demand(nb, static_cast<std::int64_t>(na / g));
  const auto sol = solve_transport(cost, na, nb, supply, demand);
  return sol.cost / static_cast<double>(na * nb / g);
}

}  // namespace dphc
