#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dphc {

// Dense n x p matrix of observations, one sample per row.
class DataMatrix {
 public:
  DataMatrix() = default;
  // Throws ValidationError on shape problems and NumericError on non-finite entries.
  DataMatrix(std::size_t n, std::size_t p, std::vector<double> values);

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return p_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * p_, p_}; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * p_ + j]; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> values_;
};

enum class MatrixMode { affinity, distance };

std::string_view to_string(MatrixMode mode);
MatrixMode matrix_mode_from_string(std::string_view s);

// Symmetric n x n table stored densely, diagonal included.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;
  AffinityMatrix(std::size_t n, MatrixMode mode) : n_(n), mode_(mode), values_(n * n, 0.0) {}
  // Checks shape and exact symmetry.
  AffinityMatrix(std::size_t n, MatrixMode mode, std::vector<double> values);

  std::size_t size() const { return n_; }
  MatrixMode mode() const { return mode_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    values_[i * n_ + j] = v;
    values_[j * n_ + i] = v;
  }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  MatrixMode mode_ = MatrixMode::affinity;
  std::vector<double> values_;
};

// Principal component scores; row i is the r-dimensional score of sample i.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t n, std::size_t r, std::vector<double> values);

  std::size_t rows() const { return n_; }
  std::size_t rank() const { return r_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * r_, r_}; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::size_t r_ = 0;
  std::vector<double> values_;
};

// (1/p) <Y_i, Y_j>.
AffinityMatrix affinity_data(const DataMatrix& y);

// (1/p) <zeta_i, zeta_j>, p being the ambient dimension of the source data.
AffinityMatrix affinity_pca(const ScoreMatrix& scores, std::size_t p);

// <Y_i, Y_j> / (|Y_i| |Y_j|). Each row is first divided by its largest
// magnitude entry, so rows that are exact positive multiples of one another
// give bit-identical results.
AffinityMatrix affinity_cosine(const DataMatrix& y);

enum class Metric { euclidean, sqeuclidean, manhattan };

std::string_view to_string(Metric metric);

AffinityMatrix pairwise_distance(const DataMatrix& y, Metric metric);

// max over i != j of |est(i, j) - truth(i, j)|.
double max_affinity_error(const AffinityMatrix& est, const AffinityMatrix& truth);

// Fraction of off-diagonal entries below zero. The latent-tree model implies
// nonnegative affinities, so a large value flags a poor model fit.
double negative_fraction(const AffinityMatrix& aff);

namespace detail {

// Fixed-order dot product: 4-lane accumulation within 256-element blocks, then
// pairwise summation of the block sums. Identical bits for identical inputs.
double blocked_dot(std::span<const double> a, std::span<const double> b);
double blocked_sq_distance(std::span<const double> a, std::span<const double> b);
double blocked_abs_distance(std::span<const double> a, std::span<const double> b);

// Full symmetric Gram matrix of the first n rows of a row-major n x p block,
// each entry equal to blocked_dot of the two rows.
std::vector<double> gram(const double* data, std::size_t n, std::size_t p);

}  // namespace detail

}  // namespace dphc
