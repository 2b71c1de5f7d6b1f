#include "dphc/dendrogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "dphc/error.hpp"

namespace dphc {

Dendrogram::Dendrogram(std::vector<Node> nodes, Orientation orientation)
    : nodes_(std::move(nodes)), orientation_(orientation) {
  const std::size_t count = nodes_.size();
  index_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw ValidationError("duplicate vertex id " + std::to_string(nodes_[i].id));
    }
  }
  parent_idx_.assign(count, -1);
  children_.assign(count, {});
  for (std::size_t i = 0; i < count; ++i) {
    if (!nodes_[i].parent) {
      ++root_count_;
      root_idx_ = static_cast<std::int64_t>(i);
      continue;
    }
    auto it = index_.find(*nodes_[i].parent);
    if (it == index_.end()) {
      throw ValidationError("vertex " + std::to_string(nodes_[i].id) +
                            " has unknown parent " + std::to_string(*nodes_[i].parent));
    }
    parent_idx_[i] = static_cast<std::int64_t>(it->second);
    children_[it->second].push_back(i);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!nodes_[i].leaf_sample) continue;
    const std::size_t s = *nodes_[i].leaf_sample;
    if (s >= sample_leaf_.size()) sample_leaf_.resize(s + 1, -1);
    if (sample_leaf_[s] >= 0) {
      throw ValidationError("sample " + std::to_string(s) + " appears on two leaves");
    }
    sample_leaf_[s] = static_cast<std::int64_t>(i);
  }

  // Depths by breadth-first walk from the root; anything left unvisited is
  // unreachable (a cycle or a second component).
  depth_.assign(count, -1);
  if (root_count_ == 1) {
    std::vector<std::size_t> queue{static_cast<std::size_t>(root_idx_)};
    depth_[queue.front()] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (std::size_t c : children_[u]) {
        depth_[c] = depth_[u] + 1;
        queue.push_back(c);
      }
    }
    is_tree_ = queue.size() == count;
  }
}

std::size_t Dendrogram::index_of(VertexId v) const {
  auto it = index_.find(v);
  if (it == index_.end()) throw ValidationError("unknown vertex id " + std::to_string(v));
  return it->second;
}

std::vector<VertexId> Dendrogram::children(VertexId v) const {
  std::vector<VertexId> out;
  for (std::size_t c : children_[index_of(v)]) out.push_back(nodes_[c].id);
  return out;
}

void Dendrogram::require_tree() const {
  if (!is_tree_) throw ValidationError("dendrogram is not a single rooted tree");
}

VertexId Dendrogram::root() const {
  require_tree();
  return nodes_[static_cast<std::size_t>(root_idx_)].id;
}

std::size_t Dendrogram::depth(VertexId v) const {
  require_tree();
  return static_cast<std::size_t>(depth_[index_of(v)]);
}

std::vector<VertexId> Dendrogram::leaves() const {
  std::vector<VertexId> out;
  for (std::int64_t idx : sample_leaf_) {
    if (idx >= 0) out.push_back(nodes_[static_cast<std::size_t>(idx)].id);
  }
  std::vector<VertexId> rest;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (children_[i].empty() && !nodes_[i].leaf_sample) rest.push_back(nodes_[i].id);
  }
  std::sort(rest.begin(), rest.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

VertexId Dendrogram::sample_leaf(std::size_t i) const {
  if (!has_sample(i)) throw ValidationError("no leaf for sample " + std::to_string(i));
  return nodes_[static_cast<std::size_t>(sample_leaf_[i])].id;
}

VertexId Dendrogram::mrca(VertexId u, VertexId v) const {
  require_tree();
  std::size_t a = index_of(u);
  std::size_t b = index_of(v);
  while (depth_[a] > depth_[b]) a = static_cast<std::size_t>(parent_idx_[a]);
  while (depth_[b] > depth_[a]) b = static_cast<std::size_t>(parent_idx_[b]);
  while (a != b) {
    a = static_cast<std::size_t>(parent_idx_[a]);
    b = static_cast<std::size_t>(parent_idx_[b]);
  }
  return nodes_[a].id;
}

double Dendrogram::tree_distance(VertexId u, VertexId v) const {
  const double m = merge_height(u, v);
  const double d = (height(u) - m) + (height(v) - m);
  return orientation_ == Orientation::affinity ? d : -d;
}

ValidationReport validate(const Dendrogram& d) {
  auto fail = [](std::string invariant, std::optional<VertexId> v, std::string msg) {
    ValidationReport r;
    r.ok = false;
    r.invariant = std::move(invariant);
    r.vertex = v;
    r.message = std::move(msg);
    return r;
  };
  const auto nodes = d.nodes();
  if (nodes.empty()) return fail("empty", std::nullopt, "dendrogram has no vertices");

  std::vector<VertexId> roots;
  for (const Node& n : nodes) {
    if (!n.parent) roots.push_back(n.id);
  }
  if (roots.empty()) return fail("no root", std::nullopt, "every vertex has a parent");
  if (roots.size() > 1) {
    return fail("multiple roots", roots[1],
                std::to_string(roots.size()) + " vertices have no parent");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    // Walking up must reach the root within |V| steps.
    std::size_t idx = i;
    std::size_t steps = 0;
    while (auto p = d.parent_index(idx)) {
      idx = *p;
      if (++steps > nodes.size()) {
        return fail("unreachable", nodes[i].id, "vertex is on a cycle");
      }
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!std::isfinite(nodes[i].height)) {
      return fail("finite height", nodes[i].id, "height is not finite");
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = d.parent_index(i);
    if (!p) continue;
    const double h = nodes[i].height;
    const double hp = nodes[*p].height;
    const bool ordered = d.orientation() == Orientation::affinity ? h >= hp : h <= hp;
    if (!ordered) {
      return fail("height order", nodes[i].id,
                  "height " + std::to_string(h) + " vs parent height " + std::to_string(hp));
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].leaf_sample && !d.child_indices(i).empty()) {
      return fail("sample leaf has children", nodes[i].id,
                  "vertex carries a sample but has children");
    }
  }
  return {};
}

double min_branch_length(const Dendrogram& d, bool include_sample_leaves) {
  if (d.size() < 2) throw ValidationError("min_branch_length needs at least two vertices");
  const bool skip_samples = d.augmented() && !include_sample_leaves;
  const double sign = d.orientation() == Orientation::affinity ? 1.0 : -1.0;
  double best = std::numeric_limits<double>::infinity();
  const auto nodes = d.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = d.parent_index(i);
    if (!p) continue;
    if (skip_samples && nodes[i].leaf_sample) continue;
    best = std::min(best, sign * (nodes[i].height - nodes[*p].height));
  }
  return best;
}

namespace {

// Sample leaves below every vertex, post-order.
std::vector<std::vector<std::size_t>> samples_below(const Dendrogram& d) {
  const auto nodes = d.nodes();
  std::vector<std::vector<std::size_t>> below(nodes.size());
  std::vector<std::size_t> order;
  order.reserve(nodes.size());
  std::vector<std::size_t> stack{d.index_of(d.root())};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    order.push_back(u);
    for (std::size_t c : d.child_indices(u)) stack.push_back(c);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t u = *it;
    if (nodes[u].leaf_sample) below[u].push_back(*nodes[u].leaf_sample);
    for (std::size_t c : d.child_indices(u)) {
      below[u].insert(below[u].end(), below[c].begin(), below[c].end());
    }
  }
  return below;
}

}  // namespace

std::vector<double> leaf_merge_heights(const Dendrogram& d) {
  const std::size_t n = d.sample_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (!d.has_sample(i)) throw ValidationError("missing leaf for sample " + std::to_string(i));
  }
  const auto below = samples_below(d);
  const auto nodes = d.nodes();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t u = 0; u < nodes.size(); ++u) {
    const double h = nodes[u].height;
    if (nodes[u].leaf_sample) {
      const std::size_t s = *nodes[u].leaf_sample;
      out[s * n + s] = h;
    }
    // Pairs whose mrca is u: one side in child a, the other in child b (or u
    // itself when u carries a sample).
    const auto kids = d.child_indices(u);
    for (std::size_t a = 0; a < kids.size(); ++a) {
      for (std::size_t b = a + 1; b < kids.size(); ++b) {
        for (std::size_t i : below[kids[a]]) {
          for (std::size_t j : below[kids[b]]) {
            out[i * n + j] = h;
            out[j * n + i] = h;
          }
        }
      }
    }
  }
  return out;
}

double merge_distortion(const Dendrogram& truth, const LeafAssignment& z,
                        const Dendrogram& est, DistortionMode mode) {
  const std::size_t n = z.size();
  if (est.sample_count() != n) {
    throw ValidationError("estimate has " + std::to_string(est.sample_count()) +
                          " sample leaves but assignment covers " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!est.has_sample(i)) throw ValidationError("sample " + std::to_string(i) + " unassigned");
    if (!truth.contains(z.z[i])) {
      throw ValidationError("sample " + std::to_string(i) + " assigned to unknown vertex");
    }
  }

  // Truth merge heights only depend on the pair of latent vertices.
  std::map<std::pair<VertexId, VertexId>, double> truth_cache;
  auto truth_m = [&](VertexId a, VertexId b) {
    if (a > b) std::swap(a, b);
    auto [it, inserted] = truth_cache.try_emplace({a, b}, 0.0);
    if (inserted) it->second = truth.merge_height(a, b);
    return it->second;
  };

  double worst = 0.0;
  if (mode == DistortionMode::all_pairs) {
    const auto m_est = leaf_merge_heights(est);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        worst = std::max(worst, std::abs(truth_m(z.z[i], z.z[j]) - m_est[i * n + j]));
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double m = est.merge_height(est.sample_leaf(i), est.sample_leaf(j));
        worst = std::max(worst, std::abs(truth_m(z.z[i], z.z[j]) - m));
      }
    }
  }
  return worst;
}

Dendrogram augment(const Dendrogram& truth, const LeafAssignment& z,
                   std::span<const double> leaf_heights) {
  const std::size_t n = z.size();
  if (leaf_heights.size() != n) throw ValidationError("leaf_heights length differs from assignment");
  const auto nodes = truth.nodes();
  const bool up = truth.orientation() == Orientation::affinity;
  std::vector<std::size_t> assigned_count(nodes.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = truth.index_of(z.z[i]);
    const double hz = nodes[idx].height;
    if (up ? leaf_heights[i] < hz : leaf_heights[i] > hz) {
      throw ValidationError("leaf height of sample " + std::to_string(i) +
                            " violates height order under vertex " + std::to_string(z.z[i]));
    }
    ++assigned_count[idx];
  }

  // Keep vertices whose subtree holds an assigned vertex.
  std::vector<std::size_t> order{truth.index_of(truth.root())};
  for (std::size_t h = 0; h < order.size(); ++h) {
    for (std::size_t c : truth.child_indices(order[h])) order.push_back(c);
  }
  std::vector<bool> keep(nodes.size(), false);
  std::vector<std::size_t> kept_children(nodes.size(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t u = *it;
    for (std::size_t c : truth.child_indices(u)) {
      if (keep[c]) {
        keep[u] = true;
        ++kept_children[u];
      }
    }
    if (assigned_count[u] > 0) keep[u] = true;
  }

  // A single-child vertex without samples is never an mrca of two leaves;
  // in each run of them only the shallowest survives.
  auto chain_member = [&](std::size_t u) {
    return keep[u] && assigned_count[u] == 0 && kept_children[u] == 1;
  };
  std::vector<std::int64_t> new_parent(nodes.size(), -1);
  std::vector<bool> emit(nodes.size(), false);
  for (std::size_t u : order) {  // parents before children
    if (!keep[u]) continue;
    const auto p = truth.parent_index(u);
    if (!p) {
      emit[u] = true;
      continue;
    }
    // Nearest emitted ancestor.
    std::size_t anc = *p;
    while (!emit[anc]) anc = static_cast<std::size_t>(new_parent[anc]);
    new_parent[u] = static_cast<std::int64_t>(anc);
    emit[u] = !(chain_member(u) && chain_member(*p));
  }

  std::vector<Node> out;
  VertexId max_id = std::numeric_limits<VertexId>::min();
  for (const Node& nd : nodes) max_id = std::max(max_id, nd.id);
  for (std::size_t u : order) {
    if (!emit[u]) continue;
    Node nd;
    nd.id = nodes[u].id;
    nd.height = nodes[u].height;
    if (new_parent[u] >= 0) nd.parent = nodes[static_cast<std::size_t>(new_parent[u])].id;
    out.push_back(nd);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Node leaf;
    leaf.id = max_id + 1 + static_cast<VertexId>(i);
    leaf.parent = z.z[i];
    leaf.height = leaf_heights[i];
    leaf.leaf_sample = i;
    out.push_back(leaf);
  }
  Dendrogram result(std::move(out), truth.orientation());
  result.set_augmented(true);
  return result;
}

namespace {

// Leaf label: sample index for sample leaves, otherwise the vertex id.
using LeafLabel = std::pair<int, std::int64_t>;

// One entry per vertex: sorted leaf labels below it plus its height.
std::vector<std::pair<std::vector<LeafLabel>, double>> clusters(const Dendrogram& d) {
  const auto nodes = d.nodes();
  std::vector<std::size_t> order{d.index_of(d.root())};
  for (std::size_t h = 0; h < order.size(); ++h) {
    for (std::size_t c : d.child_indices(order[h])) order.push_back(c);
  }
  std::vector<std::vector<LeafLabel>> below(nodes.size());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t u = *it;
    const auto kids = d.child_indices(u);
    if (kids.empty()) {
      below[u].push_back(nodes[u].leaf_sample
                             ? LeafLabel{0, static_cast<std::int64_t>(*nodes[u].leaf_sample)}
                             : LeafLabel{1, nodes[u].id});
    } else if (nodes[u].leaf_sample) {
      below[u].push_back({0, static_cast<std::int64_t>(*nodes[u].leaf_sample)});
    }
    for (std::size_t c : kids) below[u].insert(below[u].end(), below[c].begin(), below[c].end());
    std::sort(below[u].begin(), below[u].end());
  }
  std::vector<std::pair<std::vector<LeafLabel>, double>> out;
  out.reserve(nodes.size());
  for (std::size_t u : order) out.emplace_back(std::move(below[u]), nodes[u].height);
  return out;
}

std::vector<std::pair<std::vector<LeafLabel>, double>> canonical(const Dendrogram& d) {
  auto c = clusters(d);
  // Nested duplicates (single-child runs) share a leaf set; break the tie by
  // size-stable order so heights line up from the root down.
  std::stable_sort(c.begin(), c.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return c;
}

}  // namespace

bool isomorphic(const Dendrogram& a, const Dendrogram& b) {
  const auto ca = canonical(a);
  const auto cb = canonical(b);
  auto leaf_set = [](const auto& c) {
    std::vector<LeafLabel> all;
    for (const auto& [set, h] : c) {
      if (set.size() > all.size()) all = set;
    }
    return all;
  };
  if (leaf_set(ca) != leaf_set(cb)) throw ValidationError("dendrograms have different leaf sets");
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (ca[i].first != cb[i].first) return false;
  }
  return true;
}

bool equivalent(const Dendrogram& a, const Dendrogram& b, double tol) {
  if (!isomorphic(a, b)) return false;
  const auto ca = canonical(a);
  const auto cb = canonical(b);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (std::abs(ca[i].second - cb[i].second) > tol) return false;
  }
  return true;
}

}  // namespace dphc
