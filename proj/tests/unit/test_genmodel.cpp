#include <cmath>
#include <cstring>

#include "doctest.h"
#include "dphc/affinity.hpp"
#include "dphc/error.hpp"
#include "dphc/genmodel.hpp"
#include "testing.hpp"

using namespace dphc;
using namespace dphc::testing;

namespace {

// Three leaves under a root, leaf 3 alone on a long edge.
TreeSpec small_tree() {
  TreeSpec s;
  s.root_variance = 0.5;
  s.edges = {{0, 10, 1.0}, {0, 3, 2.0}, {10, 1, 0.5}, {10, 2, 0.75}};
  s.support = {1, 2, 3};
  s.weights = {0.25, 0.25, 0.5};
  s.sigma = 0.0;
  return s;
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("builtin tree heights") {
  const auto spec = builtin_tree_e1();
  spec.check();
  const auto h = true_heights(spec);
  CHECK(h.at(8) == 1.0);
  CHECK(h.at(6) == 3.0);
  CHECK(h.at(7) == 2.0);
  CHECK(h.at(1) == 8.0);
  CHECK(h.at(2) == 5.0);
  CHECK(h.at(3) == 5.0);
  CHECK(h.at(4) == 2.5);
  CHECK(h.at(5) == 9.0);
  const auto d = true_dendrogram(spec);
  CHECK(validate(d).ok);
  CHECK(d.root() == 8);
  CHECK(min_branch_length(d) == 0.5);
  CHECK(d.merge_height(1, 2) == 3.0);
  CHECK(d.merge_height(4, 5) == 2.0);
  CHECK(d.merge_height(1, 5) == 1.0);
  CHECK(support_affinity_rank(spec) == 5);
}

TEST_CASE("tree spec validation") {
  auto s = small_tree();
  CHECK_NOTHROW(s.check());
  s.weights = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(s.check(), ValidationError);
  s = small_tree();
  s.support = {1, 2, 99};
  CHECK_THROWS_AS(s.check(), ValidationError);
  s = small_tree();
  s.edges.push_back({3, 10, 1.0});
  CHECK_THROWS_AS(s.check(), ValidationError);
  s = small_tree();
  s.edges[0].variance = -1.0;
  CHECK_THROWS_AS(s.check(), ValidationError);
  s = small_tree();
  s.sigma = NAN;
  CHECK_THROWS_AS(s.check(), ValidationError);
  s = small_tree();
  s.support = {};
  s.weights = {};
  CHECK_THROWS_AS(s.check(), ValidationError);
}

TEST_CASE("additive samples are deterministic and addressable") {
  auto spec = builtin_tree_e1();
  const auto a = sample_additive(spec, 40, 70, 9);
  const auto b = sample_additive(spec, 40, 70, 9);
  CHECK(same_bits(a.y.values(), b.y.values()));
  CHECK(a.z.z == b.z.z);
  const auto c = sample_additive(spec, 40, 70, 10);
  CHECK_FALSE(same_bits(a.y.values(), c.y.values()));

  // A larger draw extends a smaller one: the first rows and columns agree.
  const auto big = sample_additive(spec, 60, 90, 9);
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(big.z.z[i] == a.z.z[i]);
    for (std::size_t j = 0; j < 70; ++j) CHECK(big.y(i, j) == a.y(i, j));
  }
}

TEST_CASE("true affinity is the merge height of the latent vertices") {
  const auto spec = builtin_tree_e1();
  const auto s = sample_additive(spec, 50, 3, 1);
  const auto d = true_dendrogram(spec);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 50; ++j) {
      CHECK(s.true_alpha(i, j) == d.merge_height(s.z.z[i], s.z.z[j]));
    }
  }
}

TEST_CASE("assignment frequencies follow the weights") {
  const auto spec = small_tree();
  const std::size_t n = 20000;
  const auto s = sample_additive(spec, n, 1, 3);
  std::map<VertexId, double> freq;
  for (auto v : s.z.z) freq[v] += 1.0 / n;
  for (std::size_t k = 0; k < spec.support.size(); ++k) {
    const double w = spec.weights[k];
    CHECK(std::abs(freq[spec.support[k]] - w) < 5.0 * std::sqrt(w * (1 - w) / n));
  }
}

TEST_CASE("zero variances give zero data") {
  TreeSpec s = small_tree();
  s.root_variance = 0.0;
  for (auto& e : s.edges) e.variance = 0.0;
  const auto out = sample_additive(s, 10, 20, 5);
  for (double v : out.y.values()) CHECK(v == 0.0);
}

TEST_CASE("empirical affinities approach the true ones") {
  // Each entry is an average of p products with variance at most
  // h_i h_j + alpha_ij^2 (plus noise terms), so 6 standard errors bound it.
  auto spec = builtin_tree_e1();
  const std::size_t n = 12, p = 40000;
  const auto s = sample_additive(spec, n, p, 2);
  const auto a = affinity_data(s.y);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double hi = s.true_alpha(i, i) + 1.0, hj = s.true_alpha(j, j) + 1.0;
      const double var = hi * hj + (s.true_alpha(i, j) + 1.0) * (s.true_alpha(i, j) + 1.0);
      const double want = s.true_alpha(i, j) + (i == j ? spec.sigma * spec.sigma : 0.0);
      CHECK(std::abs(a(i, j) - want) < 6.0 * std::sqrt(var / p));
    }
  }
}

TEST_CASE("noise-free samples at the same vertex coincide") {
  auto spec = small_tree();
  const auto s = sample_additive(spec, 30, 25, 4);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 30; ++j) {
      if (s.z.z[i] != s.z.z[j]) continue;
      for (std::size_t k = 0; k < 25; ++k) CHECK(s.y(i, k) == s.y(j, k));
    }
  }
}

TEST_CASE("leaf normalization") {
  const auto spec = builtin_tree_e1();
  const auto norm = normalize_leaf_heights(spec);
  norm.check();
  const auto h = true_heights(norm);
  for (VertexId leaf : {1, 2, 3, 4, 5}) CHECK(h.at(leaf) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h.at(8) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(h.at(6) == doctest::Approx(3.0 / 9.0).epsilon(1e-12));
  CHECK(h.at(7) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  // The tree shape is unchanged.
  CHECK(isomorphic(true_dendrogram(spec), true_dendrogram(norm)));
}

TEST_CASE("multiplicative model") {
  const auto spec = normalize_leaf_heights(builtin_tree_e1());
  const std::size_t p = 300;
  const auto s = sample_multiplicative(spec, p, 11);
  REQUIRE(s.y.rows() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(s.z.z[i] == spec.support[i]);

  const auto gammas = draw_gammas(spec, 5, 11);
  for (double g : gammas) {
    CHECK(g > 0.0);
    CHECK(g == static_cast<double>(static_cast<float>(g)));
  }
  const auto unit = sample_multiplicative_with(spec, p, 11, std::vector<double>(5, 1.0));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t k = 0; k < p; ++k) CHECK(s.y(i, k) == gammas[i] * unit.y(i, k));
  }

  // Cosine affinities do not see the factors at all.
  const auto c1 = affinity_cosine(s.y), c2 = affinity_cosine(unit.y);
  CHECK(same_bits(c1.values(), c2.values()));
  const auto other = sample_multiplicative_with(spec, p, 11, {0.125, 3.5, 7.0, static_cast<double>(0.3f), 1e3});
  CHECK(same_bits(affinity_cosine(other.y).values(), c1.values()));

  // Unnormalized trees and non-leaf supports are rejected.
  CHECK_THROWS_AS(sample_multiplicative(builtin_tree_e1(), p, 1), ValidationError);
  auto inner = spec;
  inner.support = {1, 2, 3, 4, 6};
  CHECK_THROWS_AS(sample_multiplicative(inner, p, 1), ValidationError);
  CHECK_THROWS_AS(sample_multiplicative_with(spec, p, 1, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(sample_multiplicative_with(spec, p, 1, {1.0, 1.0, 1.0, 1.0, -1.0}), ValidationError);
}

TEST_CASE("support affinity rank") {
  auto s = small_tree();
  CHECK(support_affinity_rank(s) == 3);
  // Two leaves with no edge of their own collapse onto their parent.
  s.edges[2].variance = 0.0;
  s.edges[3].variance = 0.0;
  CHECK(support_affinity_rank(s) == 2);
  s.root_variance = 0.0;
  s.edges[0].variance = 0.0;
  CHECK(support_affinity_rank(s) == 1);
}
