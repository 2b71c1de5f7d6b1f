#include "dphc/genmodel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "dphc/error.hpp"
#include "dphc/random.hpp"

namespace dphc {

namespace {

std::map<VertexId, std::vector<const TreeEdge*>> child_edges(const TreeSpec& spec) {
  std::map<VertexId, std::vector<const TreeEdge*>> out;
  for (const auto& e : spec.edges) out[e.parent].push_back(&e);
  return out;
}

double round_to_float(double x) { return static_cast<double>(static_cast<float>(x)); }

}  // namespace

VertexId TreeSpec::root_vertex() const {
  if (edges.empty()) {
    if (root) return *root;
    if (support.size() == 1) return support.front();
    throw ValidationError("tree without edges needs an explicit root");
  }
  std::set<VertexId> children;
  for (const auto& e : edges) children.insert(e.child);
  std::set<VertexId> roots;
  for (const auto& e : edges) {
    if (!children.count(e.parent)) roots.insert(e.parent);
  }
  if (roots.size() != 1) throw ValidationError("tree spec edges do not have a unique root");
  return *roots.begin();
}

std::vector<VertexId> TreeSpec::vertices() const {
  std::vector<VertexId> order{root_vertex()};
  const auto kids = child_edges(*this);
  for (std::size_t h = 0; h < order.size(); ++h) {
    auto it = kids.find(order[h]);
    if (it == kids.end()) continue;
    for (const TreeEdge* e : it->second) order.push_back(e->child);
  }
  return order;
}

void TreeSpec::check() const {
  std::set<VertexId> seen_child;
  for (const auto& e : edges) {
    if (!std::isfinite(e.variance) || e.variance < 0.0) {
      throw ValidationError("edge " + std::to_string(e.parent) + "->" + std::to_string(e.child) +
                            " has an invalid variance");
    }
    if (!seen_child.insert(e.child).second) {
      throw ValidationError("vertex " + std::to_string(e.child) + " has two parents");
    }
  }
  if (!std::isfinite(root_variance) || root_variance < 0.0) throw ValidationError("invalid root variance");
  if (!std::isfinite(sigma) || sigma < 0.0) throw ValidationError("invalid noise sigma");
  const auto verts = vertices();
  if (verts.size() != seen_child.size() + 1) throw ValidationError("tree spec edges do not form a tree");
  const std::set<VertexId> vset(verts.begin(), verts.end());
  if (support.empty()) throw ValidationError("support set is empty");
  if (support.size() != weights.size()) throw ValidationError("support and weights differ in length");
  std::set<VertexId> sset;
  for (VertexId v : support) {
    if (!vset.count(v)) throw ValidationError("support vertex " + std::to_string(v) + " is not in the tree");
    if (!sset.insert(v).second) throw ValidationError("support vertex " + std::to_string(v) + " repeated");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("support weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("support weights must sum to 1");
  if (!std::isfinite(gamma.log_mean) || !std::isfinite(gamma.log_sd) || gamma.log_sd < 0.0) {
    throw ValidationError("invalid gamma law");
  }
}

std::map<VertexId, double> true_heights(const TreeSpec& spec) {
  std::map<VertexId, double> h;
  h[spec.root_vertex()] = spec.root_variance;
  const auto kids = child_edges(spec);
  for (VertexId v : spec.vertices()) {
    auto it = kids.find(v);
    if (it == kids.end()) continue;
    for (const TreeEdge* e : it->second) h[e->child] = h[v] + e->variance;
  }
  return h;
}

Dendrogram true_dendrogram(const TreeSpec& spec) {
  const auto h = true_heights(spec);
  std::map<VertexId, VertexId> parent;
  for (const auto& e : spec.edges) parent[e.child] = e.parent;
  std::vector<Node> nodes;
  for (VertexId v : spec.vertices()) {
    Node nd;
    nd.id = v;
    nd.height = h.at(v);
    if (auto it = parent.find(v); it != parent.end()) nd.parent = it->second;
    nodes.push_back(nd);
  }
  return Dendrogram(std::move(nodes));
}

namespace {

// X_j(v) for every vertex, p values each, by Gaussian diffusion from the root.
std::map<VertexId, std::vector<double>> diffuse(const TreeSpec& spec, std::size_t p,
                                                Philox4x32::Key key) {
  std::map<VertexId, std::vector<double>> x;
  const auto kids = child_edges(spec);
  auto increments = [&](VertexId v, double variance, std::vector<double>& out) {
    const double sd = std::sqrt(variance);
    const auto id = static_cast<std::uint32_t>(v);
    for (std::size_t j = 0; j < p; j += 2) {
      const Philox4x32::Counter ctr{static_cast<std::uint32_t>(j / 2), id,
                                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(j) >> 33),
                                    static_cast<std::uint32_t>(Stream::vertex)};
      const auto [a, b] = normal_pair(Philox4x32::block(ctr, key));
      out[j] += sd * a;
      if (j + 1 < p) out[j + 1] += sd * b;
    }
  };
  const VertexId root = spec.root_vertex();
  x[root].assign(p, 0.0);
  increments(root, spec.root_variance, x[root]);
  for (VertexId v : spec.vertices()) {
    auto it = kids.find(v);
    if (it == kids.end()) continue;
    for (const TreeEdge* e : it->second) {
      auto& child = x[e->child];
      child = x[v];
      increments(e->child, e->variance, child);
    }
  }
  return x;
}

AffinityMatrix alpha_for(const Dendrogram& truth, const LeafAssignment& z) {
  const std::size_t n = z.size();
  AffinityMatrix out(n, MatrixMode::affinity);
  std::map<std::pair<VertexId, VertexId>, double> cache;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const auto key = std::minmax(z.z[i], z.z[j]);
      auto [it, fresh] = cache.try_emplace(key, 0.0);
      if (fresh) it->second = truth.merge_height(key.first, key.second);
      out.set(i, j, it->second);
    }
  }
  return out;
}

}  // namespace

SampleSet sample_additive(const TreeSpec& spec, std::size_t n, std::size_t p, std::uint64_t seed) {
  spec.check();
  if (n < 2) throw ValidationError("sample_additive needs n >= 2");
  if (p < 1) throw ValidationError("sample_additive needs p >= 1");
  const auto key = Philox4x32::key_from_seed(seed);

  LeafAssignment z;
  z.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = stream_uniform(key, Stream::assignment, static_cast<std::uint32_t>(i));
    double acc = 0.0;
    std::size_t pick = spec.support.size() - 1;
    for (std::size_t k = 0; k < spec.support.size(); ++k) {
      acc += spec.weights[k];
      if (u < acc) {
        pick = k;
        break;
      }
    }
    z.z[i] = spec.support[pick];
  }

  const auto x = diffuse(spec, p, key);
  std::vector<double> y(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& center = x.at(z.z[i]);
    double* row = y.data() + i * p;
    std::copy(center.begin(), center.end(), row);
    if (spec.sigma == 0.0) continue;
    for (std::size_t j = 0; j < p; j += 2) {
      const Philox4x32::Counter ctr{static_cast<std::uint32_t>(j / 2), static_cast<std::uint32_t>(i),
                                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(j) >> 33),
                                    static_cast<std::uint32_t>(Stream::noise)};
      const auto [a, b] = normal_pair(Philox4x32::block(ctr, key));
      row[j] += spec.sigma * a;
      if (j + 1 < p) row[j + 1] += spec.sigma * b;
    }
  }

  Dendrogram truth = true_dendrogram(spec);
  AffinityMatrix alpha = alpha_for(truth, z);
  return SampleSet{DataMatrix(n, p, std::move(y)), std::move(z), std::move(alpha), std::move(truth), seed};
}

std::vector<double> draw_gammas(const TreeSpec& spec, std::size_t count, std::uint64_t seed) {
  const auto key = Philox4x32::key_from_seed(seed);
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double e = stream_normal(key, Stream::gamma, static_cast<std::uint32_t>(i), 0);
    g[i] = round_to_float(std::exp(spec.gamma.log_mean + spec.gamma.log_sd * e));
  }
  return g;
}

SampleSet sample_multiplicative_with(const TreeSpec& spec, std::size_t p, std::uint64_t seed,
                                     const std::vector<double>& gamma) {
  spec.check();
  if (p < 1) throw ValidationError("sample_multiplicative needs p >= 1");
  Dendrogram truth = true_dendrogram(spec);
  const auto leaves = truth.leaves();
  const std::set<VertexId> leaf_set(leaves.begin(), leaves.end());
  const std::set<VertexId> support_set(spec.support.begin(), spec.support.end());
  if (leaf_set != support_set) throw ValidationError("multiplicative model needs the support to be exactly the leaves");
  const std::size_t n = spec.support.size();
  if (n < 2) throw ValidationError("multiplicative model needs at least two leaves");
  for (VertexId v : spec.support) {
    if (std::abs(truth.height(v) - 1.0) > 1e-12) {
      throw ValidationError("multiplicative model needs every leaf at height 1 (vertex " +
                            std::to_string(v) + " has " + std::to_string(truth.height(v)) + ")");
    }
  }
  if (gamma.size() != n) throw ValidationError("one gamma per sample is required");
  for (double g : gamma) {
    if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("gamma values must be positive and finite");
  }

  const auto x = diffuse(spec, p, Philox4x32::key_from_seed(seed));
  LeafAssignment z;
  z.z = spec.support;
  std::vector<double> y(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& xi = x.at(z.z[i]);
    for (std::size_t j = 0; j < p; ++j) y[i * p + j] = gamma[i] * round_to_float(xi[j]);
  }
  AffinityMatrix alpha = alpha_for(truth, z);
  return SampleSet{DataMatrix(n, p, std::move(y)), std::move(z), std::move(alpha), std::move(truth), seed};
}

SampleSet sample_multiplicative(const TreeSpec& spec, std::size_t p, std::uint64_t seed) {
  return sample_multiplicative_with(spec, p, seed, draw_gammas(spec, spec.support.size(), seed));
}

TreeSpec normalize_leaf_heights(const TreeSpec& spec) {
  spec.check();
  TreeSpec out = spec;
  if (out.edges.empty()) {
    out.root_variance = 1.0;
    return out;
  }
  std::set<VertexId> parents;
  for (const auto& e : spec.edges) parents.insert(e.parent);
  const auto h = true_heights(spec);
  double top = 0.0;
  for (const auto& [v, hv] : h) {
    if (!parents.count(v)) top = std::max(top, hv);
  }
  if (!(top > 0.0)) throw ValidationError("cannot normalize a tree whose leaves all have height 0");
  out.root_variance /= top;
  for (auto& e : out.edges) {
    if (parents.count(e.child)) {
      e.variance /= top;
    } else {
      e.variance = 1.0 - h.at(e.parent) / top;
    }
  }
  return out;
}

std::size_t support_affinity_rank(const TreeSpec& spec) {
  const Dendrogram truth = true_dendrogram(spec);
  const std::size_t k = spec.support.size();
  Eigen::MatrixXd a(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          truth.merge_height(spec.support[i], spec.support[j]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > 1e-9 * top) ++rank;
  }
  return rank;
}

TreeSpec builtin_tree_e1() {
  TreeSpec spec;
  spec.root_variance = 1.0;
  spec.edges = {{6, 1, 5.0}, {6, 2, 2.0}, {6, 3, 2.0}, {7, 4, 0.5},
                {7, 5, 7.0}, {8, 6, 2.0}, {8, 7, 1.0}};
  spec.support = {1, 2, 3, 4, 5};
  spec.weights = std::vector<double>(5, 0.2);
  spec.sigma = 1.0;
  return spec;
}

}  // namespace dphc
