#include "dphc/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <cmath>
#include <string>

#include "dphc/error.hpp"
#include "dphc/random.hpp"
#include "dphc/transport.hpp"

namespace dphc {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_matrix(const double* data, std::size_t rows, std::size_t cols) {
  return {data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

// Gram matrix of the first `rows` rows, using the same fixed-order dot
// product as the affinity estimators.
Eigen::MatrixXd gram(const DataMatrix& y, std::size_t rows) {
  const auto g = detail::gram(y.values().data(), rows, y.cols());
  return Eigen::Map<const RowMatrix>(g.data(), static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(rows));
}

// Eigenpairs sorted by decreasing eigenvalue.
struct SortedEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

SortedEigen decompose(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigendecomposition did not converge");
  SortedEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace

ScoreMatrix pc_scores(const DataMatrix& y, std::size_t r) {
  const std::size_t n = y.rows();
  const std::size_t p = y.cols();
  if (r < 1 || r > std::min(n, p)) {
    throw ValidationError("rank r=" + std::to_string(r) + " outside [1, min(n,p)=" +
                          std::to_string(std::min(n, p)) + "]");
  }
  std::vector<double> values(n * r);
  if (n <= p) {
    // Y = U S V^T, so V^T Y_i = S U^T e_i: scores are sqrt(lambda_k) U_ik.
    const auto eig = decompose(gram(y, n));
    for (std::size_t k = 0; k < r; ++k) {
      const double s = std::sqrt(std::max(0.0, eig.values(static_cast<Eigen::Index>(k))));
      for (std::size_t i = 0; i < n; ++i) {
        values[i * r + k] = s * eig.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
    }
  } else {
    const auto ym = as_matrix(y.values().data(), n, p);
    const Eigen::MatrixXd second_moment = ym.transpose() * ym;
    const auto eig = decompose(second_moment);
    const Eigen::MatrixXd scores = ym * eig.vectors.leftCols(static_cast<Eigen::Index>(r));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < r; ++k) {
        values[i * r + k] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
    }
  }
  return ScoreMatrix(n, r, std::move(values));
}

RankSelection select_rank_wasserstein(const DataMatrix& y, std::size_t r_max) {
  const std::size_t n = y.rows();
  const std::size_t p = y.cols();
  if (n < 4) throw ValidationError("rank selection needs at least 4 samples");
  const std::size_t half = (n + 1) / 2;
  if (r_max < 1 || r_max > std::min(half, p)) {
    throw ValidationError("r_max=" + std::to_string(r_max) + " outside [1, min(ceil(n/2), p)=" +
                          std::to_string(std::min(half, p)) + "]");
  }
  const auto first = as_matrix(y.values().data(), half, p);
  const auto second = as_matrix(y.values().data() + half * p, n - half, p);
  if (first.squaredNorm() == 0.0 || second.squaredNorm() == 0.0) {
    throw ValidationError("rank selection split has an all-zero half");
  }

  // Projection of the first-half rows onto the top-r eigenspace of their
  // second-moment matrix is U_r U_r^T Y_first, U from the half's Gram matrix.
  const auto eig = decompose(gram(y, half));
  const auto second_view = PointSetView{{y.values().data() + half * p, (n - half) * p}, p};

  RankSelection out;
  RowMatrix projected = RowMatrix::Zero(static_cast<Eigen::Index>(half), static_cast<Eigen::Index>(p));
  for (std::size_t r = 1; r <= r_max; ++r) {
    const Eigen::VectorXd u = eig.vectors.col(static_cast<Eigen::Index>(r - 1));
    projected += u * (u.transpose() * first);
    const double d = wasserstein_distance(
        PointSetView{{projected.data(), static_cast<std::size_t>(projected.size())}, p}, second_view);
    out.curve.emplace_back(r, d);
  }
  double best = out.curve.front().second;
  for (const auto& [r, d] : out.curve) best = std::min(best, d);
  for (const auto& [r, d] : out.curve) {
    if (d <= best + kRankTieTolerance * std::abs(best)) {
      out.r_hat = r;
      break;
    }
  }
  return out;
}

DataMatrix shuffle_rows(const DataMatrix& y, std::uint64_t seed) {
  const std::size_t n = y.rows(), p = y.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with one addressed uniform per position.
  const auto key = Philox4x32::key_from_seed(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const double u = stream_uniform(key, Stream::split, static_cast<std::uint32_t>(i));
    const auto j = std::min(i, static_cast<std::size_t>(u * static_cast<double>(i + 1)));
    std::swap(order[i], order[j]);
  }
  std::vector<double> v(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = y.row(order[i]);
    std::copy(row.begin(), row.end(), v.begin() + static_cast<std::ptrdiff_t>(i * p));
  }
  return DataMatrix(n, p, std::move(v));
}

}  // namespace dphc
