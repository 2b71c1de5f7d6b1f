#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dphc {

using VertexId = std::int64_t;

// Which way heights run along a root-to-leaf path. Affinity dendrograms (the
// dot-product algorithm, true model trees) have leaves high and the root low;
// distance dendrograms from min-distance linkages run the other way.
enum class Orientation { affinity, distance };

struct Node {
  VertexId id = 0;
  std::optional<VertexId> parent;
  double height = 0.0;
  // Set on leaves that stand for an observed sample.
  std::optional<std::size_t> leaf_sample;
};

// Rooted tree with a height per vertex.
//
// Construction only requires unique ids and parents that exist; the remaining
// structural invariants (single root, acyclic, height order) are reported by
// validate() so that malformed trees can be inspected. Query methods throw
// ValidationError when they need structure the tree does not have.
//
// Immutable after construction, so concurrent queries are safe.
class Dendrogram {
 public:
  Dendrogram() = default;
  explicit Dendrogram(std::vector<Node> nodes,
                      Orientation orientation = Orientation::affinity);

  std::span<const Node> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  Orientation orientation() const { return orientation_; }

  bool contains(VertexId v) const { return index_.count(v) != 0; }
  const Node& node(VertexId v) const { return nodes_[index_of(v)]; }
  double height(VertexId v) const { return node(v).height; }
  std::optional<VertexId> parent(VertexId v) const { return node(v).parent; }
  std::vector<VertexId> children(VertexId v) const;
  bool is_leaf(VertexId v) const { return children_[index_of(v)].empty(); }

  // Throws unless there is exactly one root.
  VertexId root() const;
  std::size_t depth(VertexId v) const;

  // Leaves in canonical order: sample leaves by sample index, then any
  // remaining leaves by vertex id.
  std::vector<VertexId> leaves() const;
  std::size_t sample_count() const { return sample_leaf_.size(); }
  // Vertex of the leaf for sample i; throws if absent.
  VertexId sample_leaf(std::size_t i) const;
  bool has_sample(std::size_t i) const { return i < sample_leaf_.size() && sample_leaf_[i] >= 0; }

  VertexId mrca(VertexId u, VertexId v) const;
  double merge_height(VertexId u, VertexId v) const { return height(mrca(u, v)); }
  double tree_distance(VertexId u, VertexId v) const;

  // Marks trees built by augment(); their sample-leaf edges are skipped by
  // min_branch_length() unless explicitly included.
  bool augmented() const { return augmented_; }
  void set_augmented(bool a) { augmented_ = a; }

  // Dense index helpers for algorithms that walk the tree.
  std::size_t index_of(VertexId v) const;
  std::optional<std::size_t> parent_index(std::size_t idx) const {
    const auto p = parent_idx_[idx];
    return p < 0 ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(p));
  }
  std::span<const std::size_t> child_indices(std::size_t idx) const { return children_[idx]; }

 private:
  void require_tree() const;

  std::vector<Node> nodes_;
  Orientation orientation_ = Orientation::affinity;
  std::unordered_map<VertexId, std::size_t> index_;
  std::vector<std::int64_t> parent_idx_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::int64_t> depth_;  // -1 when unreachable from a unique root
  std::vector<std::int64_t> sample_leaf_;
  std::int64_t root_idx_ = -1;
  std::size_t root_count_ = 0;
  bool is_tree_ = false;
  bool augmented_ = false;
};

// Realized latent vertex of each sample: z[i] is the vertex of sample i.
struct LeafAssignment {
  std::vector<VertexId> z;
  std::size_t size() const { return z.size(); }
};

struct ValidationReport {
  bool ok = true;
  std::string invariant;  // "multiple roots", "height order", ...
  std::optional<VertexId> vertex;
  std::string message;

  explicit operator bool() const { return ok; }
};

ValidationReport validate(const Dendrogram& d);

// Smallest h(v) - h(parent(v)) over non-root vertices (sign flipped for
// distance-oriented trees so that the result is a gap length).
double min_branch_length(const Dendrogram& d, bool include_sample_leaves = false);

// Dense n x n matrix of merge heights between sample leaves, computed in a
// single pass over the tree. Entry (i, i) is the leaf height.
std::vector<double> leaf_merge_heights(const Dendrogram& d);

enum class DistortionMode { all_pairs, walk };

// max over i != j of |m(z_i, z_j) - m_est(i, j)|.
double merge_distortion(const Dendrogram& truth, const LeafAssignment& z,
                        const Dendrogram& est,
                        DistortionMode mode = DistortionMode::all_pairs);

// Attaches a leaf for every sample under its latent vertex at the given
// height, removes subtrees that received no samples and shortens runs of
// single-child unassigned vertices to their shallowest member.
Dendrogram augment(const Dendrogram& truth, const LeafAssignment& z,
                   std::span<const double> leaf_heights);

// Rooted isomorphism with leaf labels fixed and internal labels free.
bool isomorphic(const Dendrogram& a, const Dendrogram& b);

// Isomorphic, and corresponding vertices have heights within tol.
bool equivalent(const Dendrogram& a, const Dendrogram& b, double tol);

}  // namespace dphc
