#include <cmath>

#include "doctest.h"
#include "dphc/dendrogram.hpp"
#include "dphc/error.hpp"
#include "testing.hpp"

using namespace dphc;
using namespace dphc::testing;

namespace {

// Fixture F: root g; e, f under g; a, b under e; c, d under f.
enum : VertexId { a = 1, b, c, d, e, f, g };

Dendrogram fixture() {
  return Dendrogram({{g, std::nullopt, 1.0, std::nullopt},
                     {e, g, 2.0, std::nullopt},
                     {f, g, 3.0, std::nullopt},
                     {a, e, 5.0, std::nullopt},
                     {b, e, 4.0, std::nullopt},
                     {c, f, 4.0, std::nullopt},
                     {d, f, 6.0, std::nullopt}});
}

Dendrogram two_leaf(double root, double l0, double l1) {
  return Dendrogram({{10, std::nullopt, root, std::nullopt}, {0, 10, l0, 0}, {1, 10, l1, 1}});
}

}  // namespace

TEST_CASE("validate accepts a minimal tree and reports violations") {
  CHECK(validate(two_leaf(1, 2, 3)).ok);

  const auto bad = validate(two_leaf(1, 0.5, 3));
  CHECK_FALSE(bad.ok);
  CHECK(bad.invariant == "height order");
  CHECK(bad.vertex == VertexId{0});

  const Dendrogram two_roots({{1, std::nullopt, 0.0, std::nullopt}, {2, std::nullopt, 0.0, std::nullopt}});
  CHECK(validate(two_roots).invariant == "multiple roots");

  const Dendrogram nan_height({{1, std::nullopt, NAN, std::nullopt}, {2, 1, 1.0, std::nullopt}});
  CHECK(validate(nan_height).invariant == "finite height");

  const Dendrogram cycle({{1, 2, 0.0, std::nullopt}, {2, 1, 0.0, std::nullopt}});
  CHECK_FALSE(validate(cycle).ok);
}

TEST_CASE("constructor rejects malformed input") {
  CHECK_THROWS_AS(Dendrogram({{1, std::nullopt, 0.0, std::nullopt}, {1, std::nullopt, 0.0, std::nullopt}}), ValidationError);
  CHECK_THROWS_AS(Dendrogram({{1, 7, 0.0, std::nullopt}}), ValidationError);
  CHECK_THROWS_AS(Dendrogram({{1, std::nullopt, 0.0, std::nullopt}, {2, 1, 0.0, 0}, {3, 1, 0.0, 0}}), ValidationError);
}

TEST_CASE("mrca, merge height and tree distance on fixture F") {
  const auto t = fixture();
  CHECK(t.mrca(a, b) == e);
  CHECK(t.mrca(a, c) == g);
  CHECK(t.mrca(a, a) == a);
  CHECK(t.merge_height(a, b) == 2.0);
  CHECK(t.merge_height(a, c) == 1.0);
  CHECK(t.merge_height(a, a) == 5.0);
  CHECK(t.tree_distance(a, b) == 5.0);
  CHECK(t.tree_distance(a, a) == 0.0);
  CHECK(t.tree_distance(c, d) == 4.0);
  CHECK_THROWS_AS(t.mrca(a, 99), ValidationError);
}

TEST_CASE("min branch length") {
  CHECK(min_branch_length(fixture()) == 1.0);
  CHECK(min_branch_length(two_leaf(1, 2, 4)) == 1.0);
  CHECK(min_branch_length(two_leaf(1, 1, 4)) == 0.0);
  CHECK_THROWS_AS(min_branch_length(Dendrogram({{1, std::nullopt, 0.0, std::nullopt}})), ValidationError);
}

TEST_CASE("merge height properties on random trees") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_tree(rng, 2 + pick(rng, 14), 0.1);
    const auto n = static_cast<VertexId>(t.size());
    for (VertexId u = 0; u < n; ++u) {
      for (VertexId v = 0; v < n; ++v) {
        const double m = t.merge_height(u, v);
        REQUIRE(m == oracle_merge_height(t, u, v));
        CHECK(m == t.merge_height(v, u));
        CHECK(m <= std::min(t.height(u), t.height(v)));
        for (VertexId w = 0; w < n; ++w) {
          CHECK(t.merge_height(u, w) >= std::min(m, t.merge_height(v, w)));
          CHECK(t.tree_distance(u, w) <= t.tree_distance(u, v) + t.tree_distance(v, w) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("leaf_merge_heights matches pairwise queries") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + pick(rng, 20);
    const auto t = random_binary_tree(rng, n);
    const auto m = leaf_merge_heights(t);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(m[i * n + j] == oracle_merge_height(t, t.sample_leaf(i), t.sample_leaf(j)));
      }
    }
  }
}

TEST_CASE("merge distortion") {
  Rng rng(3);
  const auto t = random_binary_tree(rng, 8);
  LeafAssignment z;
  for (std::size_t i = 0; i < 8; ++i) z.z.push_back(t.sample_leaf(i));
  CHECK(merge_distortion(t, z, t) == 0.0);

  std::vector<Node> shifted(t.nodes().begin(), t.nodes().end());
  for (auto& nd : shifted) nd.height += 0.3;
  const Dendrogram s(shifted);
  CHECK(merge_distortion(t, z, s) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(merge_distortion(t, z, s, DistortionMode::walk) == merge_distortion(t, z, s));

  LeafAssignment short_z{std::vector<VertexId>(z.z.begin(), z.z.begin() + 7)};
  CHECK_THROWS_AS(merge_distortion(t, short_z, t), ValidationError);
}

TEST_CASE("augment the fixture as in the worked example") {
  const auto t = fixture();
  const LeafAssignment z{{a, a, a, b, d, d}};
  const std::vector<double> lh{6, 6, 7, 5, 6.5, 7};
  const auto aug = augment(t, z, lh);
  CHECK(validate(aug).ok);
  CHECK_FALSE(aug.contains(c));
  CHECK(aug.contains(f));
  CHECK(aug.size() == 12);
  CHECK(aug.sample_count() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(aug.parent(aug.sample_leaf(i)) == z.z[i]);
    CHECK(aug.height(aug.sample_leaf(i)) == lh[i]);
  }
  // Merge heights between surviving support vertices are unchanged.
  CHECK(aug.merge_height(a, d) == t.merge_height(a, d));
  CHECK(aug.merge_height(a, b) == t.merge_height(a, b));

  const LeafAssignment all{{a, b, c, d}};
  CHECK(augment(t, all, std::vector<double>{5, 4, 4, 6}).size() == t.size() + 4);

  CHECK_THROWS_AS(augment(t, z, std::vector<double>{4, 6, 7, 5, 6.5, 7}), ValidationError);
}

TEST_CASE("augment contracts unassigned single-child chains") {
  // r -> x -> y -> leaf l, plus r -> m; only l and m receive samples.
  const Dendrogram t({{0, std::nullopt, 0.0, std::nullopt},
                      {1, 0, 1.0, std::nullopt},
                      {2, 1, 2.0, std::nullopt},
                      {3, 2, 3.0, std::nullopt},
                      {4, 0, 1.5, std::nullopt}});
  const LeafAssignment z{{3, 4, 3}};
  const auto aug = augment(t, z, std::vector<double>{3, 1.5, 4});
  CHECK(validate(aug).ok);
  CHECK(aug.contains(1));
  CHECK_FALSE(aug.contains(2));
  CHECK(aug.parent(3) == VertexId{1});
  CHECK(aug.merge_height(aug.sample_leaf(0), aug.sample_leaf(1)) == 0.0);
  CHECK(aug.merge_height(aug.sample_leaf(0), aug.sample_leaf(2)) == 3.0);
}

TEST_CASE("isomorphism") {
  Rng rng(17);
  const auto t = random_binary_tree(rng, 6);
  CHECK(isomorphic(t, t));

  // Relabel internal vertices.
  std::vector<Node> relabeled(t.nodes().begin(), t.nodes().end());
  for (auto& nd : relabeled) {
    if (!nd.leaf_sample) nd.id += 1000;
    if (nd.parent) *nd.parent += 1000;
  }
  const Dendrogram r(relabeled);
  CHECK(isomorphic(t, r));
  CHECK(isomorphic(r, t));
  CHECK(equivalent(t, r, 0.0));

  // Caterpillar ((((0,1),2),3)) against balanced ((0,1),(2,3)).
  const Dendrogram cat({{10, std::nullopt, 0, std::nullopt}, {11, 10, 1, std::nullopt}, {12, 11, 2, std::nullopt},
                        {0, 12, 3, 0}, {1, 12, 3, 1}, {2, 11, 3, 2}, {3, 10, 3, 3}});
  const Dendrogram bal({{10, std::nullopt, 0, std::nullopt}, {11, 10, 1, std::nullopt}, {12, 10, 1, std::nullopt},
                        {0, 11, 3, 0}, {1, 11, 3, 1}, {2, 12, 3, 2}, {3, 12, 3, 3}});
  CHECK_FALSE(isomorphic(cat, bal));
  CHECK_THROWS_AS(isomorphic(cat, two_leaf(0, 1, 1)), ValidationError);

  std::vector<Node> bumped(t.nodes().begin(), t.nodes().end());
  bumped.front().height += 1e-6;
  CHECK(isomorphic(t, Dendrogram(bumped)));
  CHECK_FALSE(equivalent(t, Dendrogram(bumped), 1e-9));
}
