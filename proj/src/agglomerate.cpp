#include "dphc/agglomerate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dphc/error.hpp"

namespace dphc {

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
    case Linkage::single: return "single";
    case Linkage::ward: return "ward";
  }
  return "?";
}

Linkage linkage_from_string(std::string_view s) {
  if (s == "average") return Linkage::average;
  if (s == "complete") return Linkage::complete;
  if (s == "single") return Linkage::single;
  if (s == "ward") return Linkage::ward;
  throw ValidationError("unknown linkage '" + std::string(s) + "'");
}

double linkage_update(std::size_t u_size, std::size_t v_size, double a_u, double a_v) {
  const double nu = static_cast<double>(u_size);
  const double nv = static_cast<double>(v_size);
  const double mixed = (nu * a_u + nv * a_v) / (nu + nv);
  // A convex combination lies between its endpoints; rounding must not push
  // it outside, or merge values would stop being monotone.
  return std::clamp(mixed, std::min(a_u, a_v), std::max(a_u, a_v));
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(2 * n), label_(2 * n) {
    std::iota(parent_.begin(), parent_.end(), 0);
    std::iota(label_.begin(), label_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Joins the sets of a and b and tags the result with `label`.
  void join(std::size_t a, std::size_t b, std::size_t label) {
    const std::size_t ra = find(a);
    const std::size_t rb = find(b);
    parent_[rb] = ra;
    label_[ra] = label;
  }
  std::size_t label(std::size_t x) { return label_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> label_;
};

// Merge expressed through representative samples (the smallest sample of
// each side), independent of when it happened.
struct RawMerge {
  std::size_t rep_a;
  std::size_t rep_b;
  double value;
};

class MergeEngine {
 public:
  MergeEngine(const AffinityMatrix& mat, Linkage linkage, Objective objective)
      : n_(mat.size()),
        linkage_(linkage),
        maximize_(objective == Objective::max_affinity),
        d_(mat.values().begin(), mat.values().end()),
        size_(n_, 1),
        alive_(n_, 1) {}

  // True if value a should be merged before value b.
  bool better(double a, double b) const { return maximize_ ? a > b : a < b; }

  double at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

  // Merges slot j into slot i (i < j) and updates row i.
  void merge(std::size_t i, std::size_t j) {
    const double dij = at(i, j);
    const std::size_t ni = size_[i];
    const std::size_t nj = size_[j];
    for (std::size_t k = 0; k < n_; ++k) {
      if (!alive_[k] || k == i || k == j) continue;
      const double a = at(i, k);
      const double b = at(j, k);
      double v = 0.0;
      switch (linkage_) {
        case Linkage::average:
          v = linkage_update(ni, nj, a, b);
          break;
        case Linkage::single:
          v = maximize_ ? std::max(a, b) : std::min(a, b);
          break;
        case Linkage::complete:
          v = maximize_ ? std::min(a, b) : std::max(a, b);
          break;
        case Linkage::ward: {
          const double nk = static_cast<double>(size_[k]);
          const double fi = static_cast<double>(ni);
          const double fj = static_cast<double>(nj);
          v = ((fi + nk) * a + (fj + nk) * b - nk * dij) / (fi + fj + nk);
          // Lance-Williams for Ward never drops below the merged distance.
          v = std::max(v, dij);
          break;
        }
      }
      d_[i * n_ + k] = v;
      d_[k * n_ + i] = v;
    }
    d_[i * n_ + i] = dij;
    size_[i] = ni + nj;
    alive_[j] = 0;
  }

  std::vector<RawMerge> run_naive(const MergeObserver& observer) {
    std::vector<RawMerge> merges;
    std::vector<std::size_t> active(n_);
    std::iota(active.begin(), active.end(), 0);
    std::vector<std::vector<std::size_t>> members;
    if (observer) {
      members.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) members[i] = {i};
    }
    for (std::size_t step = 0; step + 1 < n_; ++step) {
      std::size_t bi = 0;
      std::size_t bj = 0;
      bool found = false;
      // Slots are visited in increasing (min sample, max sample) order, so
      // keeping only strict improvements applies the lexicographic tie rule.
      for (std::size_t x = 0; x < active.size(); ++x) {
        for (std::size_t y = x + 1; y < active.size(); ++y) {
          const double v = at(active[x], active[y]);
          if (!found || better(v, at(bi, bj))) {
            bi = active[x];
            bj = active[y];
            found = true;
          }
        }
      }
      merges.push_back({bi, bj, at(bi, bj)});
      merge(bi, bj);
      active.erase(std::find(active.begin(), active.end(), bj));
      if (observer) {
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        members[bj].clear();
        observer(MergeSnapshot{step, active, members, d_, n_});
      }
    }
    return merges;
  }

  std::vector<RawMerge> run_chain() {
    std::vector<RawMerge> merges;
    merges.reserve(n_ - 1);
    std::vector<std::size_t> chain;
    chain.reserve(n_);
    std::size_t remaining = n_;
    std::size_t first_alive = 0;
    while (remaining > 1) {
      if (chain.empty()) {
        while (!alive_[first_alive]) ++first_alive;
        chain.push_back(first_alive);
      }
      const std::size_t tip = chain.back();
      const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : n_;
      std::size_t best = n_;
      for (std::size_t k = 0; k < n_; ++k) {
        if (!alive_[k] || k == tip) continue;
        if (best == n_ || better(at(tip, k), at(tip, best))) best = k;
      }
      // Prefer the previous chain element on ties so the chain terminates.
      if (prev != n_ && !better(at(tip, best), at(tip, prev))) best = prev;
      if (best == prev) {
        chain.pop_back();
        chain.pop_back();
        const std::size_t i = std::min(tip, prev);
        const std::size_t j = std::max(tip, prev);
        merges.push_back({i, j, at(i, j)});
        merge(i, j);
        --remaining;
      } else {
        chain.push_back(best);
      }
    }
    // Reducibility makes merge values monotone along every root path, so a
    // stable sort yields a valid merge order.
    std::stable_sort(merges.begin(), merges.end(),
                     [&](const RawMerge& a, const RawMerge& b) { return better(a.value, b.value); });
    return merges;
  }

 private:
  std::size_t n_;
  Linkage linkage_;
  bool maximize_;
  std::vector<double> d_;
  std::vector<std::size_t> size_;
  std::vector<char> alive_;
};

MergeTrace label_merges(std::size_t n, const std::vector<RawMerge>& merges) {
  MergeTrace trace;
  trace.n = n;
  trace.steps.reserve(merges.size());
  UnionFind uf(n);
  std::vector<std::size_t> sizes(2 * n - 1, 1);
  for (std::size_t m = 0; m < merges.size(); ++m) {
    const std::size_t a = uf.label(merges[m].rep_a);
    const std::size_t b = uf.label(merges[m].rep_b);
    const std::size_t id = n + m;
    sizes[id] = sizes[a] + sizes[b];
    trace.steps.push_back({std::min(a, b), std::max(a, b), merges[m].value, sizes[id]});
    uf.join(merges[m].rep_a, merges[m].rep_b, id);
  }
  return trace;
}

}  // namespace

Dendrogram dendrogram_from_trace(const MergeTrace& trace, std::span<const double> self,
                                 Objective objective) {
  const std::size_t n = trace.n;
  if (trace.steps.size() + 1 != n) throw ValidationError("trace must hold n - 1 merges");
  if (self.size() != n) throw ValidationError("self-affinity vector length differs from n");
  std::vector<Node> nodes(2 * n - 1);
  for (std::size_t v = 0; v < nodes.size(); ++v) nodes[v].id = static_cast<VertexId>(v);
  for (std::size_t m = 0; m < trace.steps.size(); ++m) {
    const auto& s = trace.steps[m];
    const VertexId w = static_cast<VertexId>(n + m);
    nodes[n + m].height = s.value;
    nodes[s.a].parent = w;
    nodes[s.b].parent = w;
  }
  const bool up = objective == Objective::max_affinity;
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i].leaf_sample = i;
    const double hp = nodes[static_cast<std::size_t>(*nodes[i].parent)].height;
    nodes[i].height = up ? std::max(hp, self[i]) : std::min(hp, self[i]);
  }
  return Dendrogram(std::move(nodes), up ? Orientation::affinity : Orientation::distance);
}

ClusterResult cluster_generic(const AffinityMatrix& mat, Linkage linkage, Objective objective,
                              Engine engine, const MergeObserver& observer) {
  const std::size_t n = mat.size();
  if (n < 2) throw ValidationError("clustering needs at least two samples");
  const bool affinity_mode = mat.mode() == MatrixMode::affinity;
  if (affinity_mode != (objective == Objective::max_affinity)) {
    throw ValidationError(affinity_mode ? "affinity matrix requires the max-affinity objective"
                                        : "distance matrix requires the min-distance objective");
  }
  if (linkage == Linkage::ward && objective != Objective::min_distance) {
    throw ValidationError("ward linkage requires squared Euclidean distances");
  }
  for (std::size_t k = 0; k < mat.values().size(); ++k) {
    if (!std::isfinite(mat.values()[k])) {
      throw NumericError("non-finite matrix entry at (" + std::to_string(k / n) + ", " +
                         std::to_string(k % n) + ")");
    }
  }

  MergeEngine eng(mat, linkage, objective);
  const auto raw = (engine == Engine::naive || observer) ? eng.run_naive(observer) : eng.run_chain();

  ClusterResult out;
  out.trace = label_merges(n, raw);
  std::vector<double> self(n);
  for (std::size_t i = 0; i < n; ++i) self[i] = mat(i, i);
  out.dendrogram = dendrogram_from_trace(out.trace, self, objective);
  if (affinity_mode) out.negative_fraction = negative_fraction(mat);
  return out;
}

ClusterResult cluster_dot(const AffinityMatrix& aff, Engine engine) {
  if (aff.mode() != MatrixMode::affinity) throw ValidationError("cluster_dot expects an affinity matrix");
  return cluster_generic(aff, Linkage::average, Objective::max_affinity, engine);
}

std::vector<std::size_t> cluster_members(const MergeTrace& trace, std::size_t id) {
  const std::size_t n = trace.n;
  if (id >= 2 * n - 1) throw ValidationError("cluster id out of range");
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{id};
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    if (c < n) {
      out.push_back(c);
    } else {
      stack.push_back(trace.steps[c - n].a);
      stack.push_back(trace.steps[c - n].b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> groups_from_labels(std::vector<std::size_t> root_of) {
  std::vector<std::vector<std::size_t>> groups;
  const std::size_t none = root_of.size();
  std::vector<std::size_t> slot(*std::max_element(root_of.begin(), root_of.end()) + 1, none);
  for (std::size_t i = 0; i < root_of.size(); ++i) {
    std::size_t& s = slot[root_of[i]];
    if (s == none) {
      s = groups.size();
      groups.emplace_back();
    }
    groups[s].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<std::vector<std::size_t>> flat_cut(const MergeTrace& trace, std::size_t k) {
  const std::size_t n = trace.n;
  if (k < 1 || k > n) throw ValidationError("k must lie in [1, n]");
  UnionFind uf(n);
  for (std::size_t m = 0; m + k < n; ++m) {
    const auto& s = trace.steps[m];
    uf.join(cluster_members(trace, s.a).front(), cluster_members(trace, s.b).front(), n + m);
  }
  std::vector<std::size_t> root_of(n);
  for (std::size_t i = 0; i < n; ++i) root_of[i] = uf.find(i);
  return groups_from_labels(std::move(root_of));
}

std::vector<std::vector<std::size_t>> flat_cut(const Dendrogram& d, std::size_t k) {
  const std::size_t n = d.sample_count();
  if (k < 1 || k > n) throw ValidationError("k must lie in [1, n]");
  const auto nodes = d.nodes();
  const double h_root = d.height(d.root());
  std::vector<std::size_t> internal;
  for (std::size_t u = 0; u < nodes.size(); ++u) {
    if (!d.child_indices(u).empty()) internal.push_back(u);
  }
  std::stable_sort(internal.begin(), internal.end(), [&](std::size_t a, std::size_t b) {
    const double ga = std::abs(nodes[a].height - h_root);
    const double gb = std::abs(nodes[b].height - h_root);
    if (ga != gb) return ga < gb;
    return d.depth(nodes[a].id) < d.depth(nodes[b].id);
  });
  std::vector<char> removed(nodes.size(), 0);
  std::size_t clusters = 1;
  for (std::size_t u : internal) {
    if (clusters >= k) break;
    removed[u] = 1;
    clusters += d.child_indices(u).size() - 1;
  }
  if (clusters != k) throw ValidationError("dendrogram cannot be cut into exactly " + std::to_string(k) + " clusters");
  // Each sample belongs to its highest non-removed ancestor.
  std::vector<std::size_t> root_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t u = d.index_of(d.sample_leaf(i));
    while (auto p = d.parent_index(u)) {
      if (removed[*p]) break;
      u = *p;
    }
    root_of[i] = u;
  }
  return groups_from_labels(std::move(root_of));
}

}  // namespace dphc
