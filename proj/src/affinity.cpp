#include "dphc/affinity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "dphc/error.hpp"

namespace dphc {

DataMatrix::DataMatrix(std::size_t n, std::size_t p, std::vector<double> values)
    : n_(n), p_(p), values_(std::move(values)) {
  if (n < 2 || p < 1) {
    throw ValidationError("data matrix needs n >= 2 and p >= 1 (got " + std::to_string(n) + "x" +
                          std::to_string(p) + ")");
  }
  if (values_.size() != n * p) throw ValidationError("data matrix value count does not match n*p");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw NumericError("non-finite entry at row " + std::to_string(k / p) + ", column " +
                         std::to_string(k % p));
    }
  }
}

std::string_view to_string(MatrixMode mode) {
  return mode == MatrixMode::affinity ? "affinity" : "distance";
}

MatrixMode matrix_mode_from_string(std::string_view s) {
  if (s == "affinity") return MatrixMode::affinity;
  if (s == "distance") return MatrixMode::distance;
  throw ValidationError("unknown matrix mode '" + std::string(s) + "'");
}

AffinityMatrix::AffinityMatrix(std::size_t n, MatrixMode mode, std::vector<double> values)
    : n_(n), mode_(mode), values_(std::move(values)) {
  if (values_.size() != n * n) throw ValidationError("affinity matrix value count is not n*n");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (values_[i * n + j] != values_[j * n + i]) {
        throw ValidationError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }
}

ScoreMatrix::ScoreMatrix(std::size_t n, std::size_t r, std::vector<double> values)
    : n_(n), r_(r), values_(std::move(values)) {
  if (values_.size() != n * r) throw ValidationError("score matrix value count is not n*r");
}

namespace detail {
namespace {

constexpr std::size_t kBlock = 256;

struct DotOp {
  static double apply(double a, double b) { return a * b; }
};
struct SqDiffOp {
  static double apply(double a, double b) {
    const double d = a - b;
    return d * d;
  }
};
struct AbsDiffOp {
  static double apply(double a, double b) { return std::abs(a - b); }
};

template <class Op>
double block_sum(const double* a, const double* b, std::size_t len) {
  std::array<double, 4> acc{0.0, 0.0, 0.0, 0.0};
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    for (std::size_t l = 0; l < 4; ++l) acc[l] += Op::apply(a[k + l], b[k + l]);
  }
  for (; k < len; ++k) acc[0] += Op::apply(a[k], b[k]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double pairwise_sum(const double* s, std::size_t count) {
  if (count == 0) return 0.0;
  if (count == 1) return s[0];
  const std::size_t half = count / 2;
  return pairwise_sum(s, half) + pairwise_sum(s + half, count - half);
}

template <class Op>
double reduce(std::span<const double> a, std::span<const double> b) {
  const std::size_t p = a.size();
  const std::size_t blocks = (p + kBlock - 1) / kBlock;
  std::array<double, 64> small{};
  std::vector<double> big;
  double* sums = small.data();
  if (blocks > small.size()) {
    big.resize(blocks);
    sums = big.data();
  }
  for (std::size_t c = 0; c < blocks; ++c) {
    const std::size_t off = c * kBlock;
    sums[c] = block_sum<Op>(a.data() + off, b.data() + off, std::min(kBlock, p - off));
  }
  return pairwise_sum(sums, blocks);
}

// All unordered pairs (including i == j when with_diagonal) in 4x4 row tiles
// so that each block of both tiles stays in cache. Every pair is reduced in
// the same order as reduce<Op>, so results match the single-pair routine.
template <class Op, class Emit>
void all_pairs(const double* data, std::size_t n, std::size_t p, bool with_diagonal, Emit emit) {
  constexpr std::size_t kTile = 4;
  const std::size_t blocks = std::max<std::size_t>(1, (p + kBlock - 1) / kBlock);
  std::vector<double> sums(kTile * kTile * blocks);
  for (std::size_t i0 = 0; i0 < n; i0 += kTile) {
    const std::size_t i1 = std::min(n, i0 + kTile);
    for (std::size_t j0 = i0; j0 < n; j0 += kTile) {
      const std::size_t j1 = std::min(n, j0 + kTile);
      for (std::size_t c = 0; c < blocks; ++c) {
        const std::size_t off = c * kBlock;
        const std::size_t len = p > off ? std::min(kBlock, p - off) : 0;
        for (std::size_t i = i0; i < i1; ++i) {
          for (std::size_t j = std::max(j0, i); j < j1; ++j) {
            if (i == j && !with_diagonal) continue;
            sums[((i - i0) * kTile + (j - j0)) * blocks + c] =
                block_sum<Op>(data + i * p + off, data + j * p + off, len);
          }
        }
      }
      for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t j = std::max(j0, i); j < j1; ++j) {
          if (i == j && !with_diagonal) continue;
          emit(i, j, pairwise_sum(&sums[((i - i0) * kTile + (j - j0)) * blocks], blocks));
        }
      }
    }
  }
}

}  // namespace

double blocked_dot(std::span<const double> a, std::span<const double> b) {
  return reduce<DotOp>(a, b);
}
double blocked_sq_distance(std::span<const double> a, std::span<const double> b) {
  return reduce<SqDiffOp>(a, b);
}
double blocked_abs_distance(std::span<const double> a, std::span<const double> b) {
  return reduce<AbsDiffOp>(a, b);
}

std::vector<double> gram(const double* data, std::size_t n, std::size_t p) {
  std::vector<double> out(n * n);
  all_pairs<DotOp>(data, n, p, true, [&](std::size_t i, std::size_t j, double s) {
    out[i * n + j] = s;
    out[j * n + i] = s;
  });
  return out;
}

}  // namespace detail

namespace {

AffinityMatrix scaled_gram(const double* data, std::size_t n, std::size_t p, double scale) {
  AffinityMatrix out(n, MatrixMode::affinity);
  detail::all_pairs<detail::DotOp>(data, n, p, true,
                                   [&](std::size_t i, std::size_t j, double s) { out.set(i, j, s / scale); });
  return out;
}

}  // namespace

AffinityMatrix affinity_data(const DataMatrix& y) {
  return scaled_gram(y.values().data(), y.rows(), y.cols(), static_cast<double>(y.cols()));
}

AffinityMatrix affinity_pca(const ScoreMatrix& scores, std::size_t p) {
  if (p == 0) throw ValidationError("ambient dimension p must be positive");
  if (scores.rank() > p) throw ValidationError("score rank exceeds ambient dimension");
  return scaled_gram(scores.values().data(), scores.rows(), scores.rank(), static_cast<double>(p));
}

AffinityMatrix affinity_cosine(const DataMatrix& y) {
  const std::size_t n = y.rows();
  const std::size_t p = y.cols();
  std::vector<double> scaled(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = y.row(i);
    double peak = 0.0;
    for (double v : row) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) {
      throw ValidationError("cosine affinity undefined: row " + std::to_string(i) + " has zero norm");
    }
    for (std::size_t k = 0; k < p; ++k) scaled[i * p + k] = row[k] / peak;
  }
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> r(scaled.data() + i * p, p);
    norm[i] = std::sqrt(detail::blocked_dot(r, r));
  }
  AffinityMatrix out(n, MatrixMode::affinity);
  detail::all_pairs<detail::DotOp>(scaled.data(), n, p, false, [&](std::size_t i, std::size_t j, double s) {
    out.set(i, j, std::clamp(s / (norm[i] * norm[j]), -1.0, 1.0));
  });
  for (std::size_t i = 0; i < n; ++i) out.set(i, i, 1.0);
  return out;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::euclidean: return "euclidean";
    case Metric::sqeuclidean: return "sqeuclidean";
    case Metric::manhattan: return "manhattan";
  }
  return "?";
}

AffinityMatrix pairwise_distance(const DataMatrix& y, Metric metric) {
  const std::size_t n = y.rows();
  const std::size_t p = y.cols();
  AffinityMatrix out(n, MatrixMode::distance);
  const double* data = y.values().data();
  if (metric == Metric::manhattan) {
    detail::all_pairs<detail::AbsDiffOp>(data, n, p, false,
                                         [&](std::size_t i, std::size_t j, double s) { out.set(i, j, s); });
  } else {
    const bool root = metric == Metric::euclidean;
    detail::all_pairs<detail::SqDiffOp>(data, n, p, false, [&](std::size_t i, std::size_t j, double s) {
      out.set(i, j, root ? std::sqrt(s) : s);
    });
  }
  return out;
}

double max_affinity_error(const AffinityMatrix& est, const AffinityMatrix& truth) {
  if (est.size() != truth.size()) throw ValidationError("affinity matrices differ in size");
  if (est.mode() != MatrixMode::affinity || truth.mode() != MatrixMode::affinity) {
    throw ValidationError("max_affinity_error expects affinity-mode matrices");
  }
  double worst = 0.0;
  const std::size_t n = est.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      worst = std::max(worst, std::abs(est(i, j) - truth(i, j)));
    }
  }
  return worst;
}

double negative_fraction(const AffinityMatrix& aff) {
  const std::size_t n = aff.size();
  if (n < 2) return 0.0;
  std::size_t neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (aff(i, j) < 0.0) ++neg;
    }
  }
  return static_cast<double>(neg) / static_cast<double>(n * (n - 1) / 2);
}

}  // namespace dphc
