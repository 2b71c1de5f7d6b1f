#include "dphc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dphc/affinity.hpp"
#include "dphc/error.hpp"
#include "dphc/parallel.hpp"
#include "dphc/spectral.hpp"

namespace dphc {

void LabelHierarchy::check() const {
  if (levels.empty()) throw ValidationError("label hierarchy has no levels");
  for (const auto& level : levels) {
    if (level.size() != levels.front().size()) throw ValidationError("label levels differ in length");
  }
}

TiedRanking midranks(std::vector<std::size_t> items, const std::vector<std::int64_t>& closeness) {
  const std::size_t k = items.size();
  if (closeness.size() != k) throw ValidationError("one closeness key per item required");
  std::vector<std::size_t> by_item(k);
  std::iota(by_item.begin(), by_item.end(), 0);
  std::sort(by_item.begin(), by_item.end(), [&](std::size_t a, std::size_t b) { return items[a] < items[b]; });
  std::vector<std::int64_t> key(k);
  TiedRanking out{std::vector<std::size_t>(k), std::vector<double>(k)};
  for (std::size_t t = 0; t < k; ++t) {
    out.items[t] = items[by_item[t]];
    key[t] = closeness[by_item[t]];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  for (std::size_t s = 0; s < k;) {
    std::size_t e = s;
    while (e < k && key[order[e]] == key[order[s]]) ++e;
    const double mid = 0.5 * static_cast<double>(s + 1 + e);
    for (std::size_t t = s; t < e; ++t) out.rank[order[t]] = mid;
    s = e;
  }
  return out;
}

TiedRanking rank_from_labels(const LabelHierarchy& h, std::size_t i) {
  h.check();
  const std::size_t n = h.size();
  if (n < 3) throw ValidationError("rankings need at least 3 samples");
  if (i >= n) throw ValidationError("sample " + std::to_string(i) + " out of range");
  std::vector<std::size_t> items;
  std::vector<std::int64_t> key;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    std::int64_t deepest = 0;
    for (std::size_t l = 0; l < h.levels.size(); ++l) {
      if (h.levels[l][j] == h.levels[l][i]) deepest = static_cast<std::int64_t>(l) + 1;
    }
    items.push_back(j);
    key.push_back(deepest);
  }
  return midranks(std::move(items), key);
}

std::vector<TiedRanking> rank_all_from_labels(const LabelHierarchy& h) {
  std::vector<TiedRanking> out;
  out.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out.push_back(rank_from_labels(h, i));
  return out;
}

namespace {

// Sample leaves of every vertex subtree, as a flat preorder listing plus
// [begin, end) per vertex index.
struct SubtreeSamples {
  std::vector<std::size_t> samples;
  std::vector<std::pair<std::size_t, std::size_t>> range;
};

SubtreeSamples subtree_samples(const Dendrogram& d) {
  SubtreeSamples out;
  out.range.resize(d.size());
  const std::size_t root = d.index_of(d.root());
  std::vector<std::pair<std::size_t, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [v, done] = stack.back();
    stack.pop_back();
    if (done) {
      out.range[v].second = out.samples.size();
      continue;
    }
    out.range[v].first = out.samples.size();
    if (const auto& s = d.nodes()[v].leaf_sample) out.samples.push_back(*s);
    stack.push_back({v, true});
    const auto kids = d.child_indices(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, false});
  }
  return out;
}

std::size_t check_samples(const Dendrogram& d) {
  const std::size_t n = d.sample_count();
  if (n < 3) throw ValidationError("rankings need at least 3 samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!d.has_sample(i)) throw ValidationError("dendrogram is missing the leaf of sample " + std::to_string(i));
  }
  return n;
}

TiedRanking rank_with(const Dendrogram& d, const SubtreeSamples& sub, std::size_t n, std::size_t i) {
  std::vector<std::int64_t> key(n, -1);
  std::size_t v = d.index_of(d.sample_leaf(i));
  std::int64_t depth = static_cast<std::int64_t>(d.depth(d.sample_leaf(i)));
  for (std::size_t s = sub.range[v].first; s < sub.range[v].second; ++s) key[sub.samples[s]] = depth;
  while (auto p = d.parent_index(v)) {
    --depth;
    const auto [pb, pe] = sub.range[*p];
    const auto [cb, ce] = sub.range[v];
    for (std::size_t s = pb; s < pe; ++s) {
      if (s >= cb && s < ce) continue;
      key[sub.samples[s]] = depth;
    }
    v = *p;
  }
  std::vector<std::size_t> items;
  std::vector<std::int64_t> closeness;
  items.reserve(n - 1);
  closeness.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    items.push_back(j);
    closeness.push_back(key[j]);
  }
  return midranks(std::move(items), closeness);
}

}  // namespace

TiedRanking rank_from_dendrogram(const Dendrogram& d, std::size_t i) {
  const std::size_t n = check_samples(d);
  if (i >= n) throw ValidationError("sample " + std::to_string(i) + " out of range");
  return rank_with(d, subtree_samples(d), n, i);
}

std::vector<TiedRanking> rank_all_from_dendrogram(const Dendrogram& d) {
  const std::size_t n = check_samples(d);
  const auto sub = subtree_samples(d);
  std::vector<TiedRanking> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rank_with(d, sub, n, i));
  return out;
}

namespace {

// Pairs tied in consecutive runs of a sorted sequence.
template <typename Eq>
std::uint64_t tied_pairs(std::size_t k, Eq eq) {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < k;) {
    std::size_t e = s + 1;
    while (e < k && eq(s, e)) ++e;
    const std::uint64_t run = e - s;
    total += run * (run - 1) / 2;
    s = e;
  }
  return total;
}

// Bottom-up merge sort of v, returning the number of inversions.
std::uint64_t sort_count_swaps(std::vector<double>& v) {
  const std::size_t k = v.size();
  std::vector<double> buf(k);
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < k; width *= 2) {
    for (std::size_t lo = 0; lo < k; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, k);
      const std::size_t hi = std::min(lo + 2 * width, k);
      std::size_t a = lo, b = mid, o = lo;
      while (a < mid && b < hi) {
        if (v[b] < v[a]) {
          swaps += mid - a;
          buf[o++] = v[b++];
        } else {
          buf[o++] = v[a++];
        }
      }
      while (a < mid) buf[o++] = v[a++];
      while (b < hi) buf[o++] = v[b++];
    }
    std::swap(v, buf);
  }
  return swaps;
}

}  // namespace

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("rankings differ in length");
  const std::size_t k = x.size();
  if (k < 2) throw ValidationError("tau_b needs at least 2 items");
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> ys(k);
  for (std::size_t t = 0; t < k; ++t) ys[t] = y[order[t]];

  const std::uint64_t n0 = static_cast<std::uint64_t>(k) * (k - 1) / 2;
  const std::uint64_t n1 = tied_pairs(k, [&](std::size_t s, std::size_t e) { return x[order[e]] == x[order[s]]; });
  const std::uint64_t n3 = tied_pairs(k, [&](std::size_t s, std::size_t e) {
    return x[order[e]] == x[order[s]] && ys[e] == ys[s];
  });
  const std::uint64_t swaps = sort_count_swaps(ys);
  const std::uint64_t n2 = tied_pairs(k, [&](std::size_t s, std::size_t e) { return ys[e] == ys[s]; });
  if (n1 == n0 || n2 == n0) throw ValidationError("tau_b is undefined when one ranking ties every item");

  const double s = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
                   static_cast<double>(n3) - 2.0 * static_cast<double>(swaps);
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  return std::clamp(s / denom, -1.0, 1.0);
}

double kendall_tau_b(const TiedRanking& x, const TiedRanking& y) {
  if (x.items != y.items) throw ValidationError("rankings cover different items");
  return kendall_tau_b(std::span<const double>(x.rank), std::span<const double>(y.rank));
}

TauSummary summarize(const std::vector<double>& values, std::size_t excluded) {
  TauSummary out;
  out.used = values.size();
  out.excluded = excluded;
  if (values.empty()) return out;
  const double m = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  out.mean = m;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    out.stderr_ = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return out;
}

TauSummary mean_tau_b(const std::vector<TiedRanking>& truth, const Dendrogram& est) {
  const auto ranks = rank_all_from_dendrogram(est);
  if (ranks.size() != truth.size()) {
    throw ValidationError("truth covers " + std::to_string(truth.size()) + " samples but the dendrogram has " +
                          std::to_string(ranks.size()));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].items != ranks[i].items) throw ValidationError("truth ranking " + std::to_string(i) + " has wrong items");
  }
  std::vector<double> tau(truth.size());
  std::vector<char> degenerate(truth.size(), 0);
  parallel_for(truth.size(), [&](std::size_t i) {
    try {
      tau[i] = kendall_tau_b(truth[i], ranks[i]);
    } catch (const ValidationError&) {
      degenerate[i] = 1;
    }
  });
  std::vector<double> values;
  values.reserve(truth.size());
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (degenerate[i]) {
      ++excluded;
    } else {
      values.push_back(tau[i]);
    }
  }
  if (values.empty()) throw ValidationError("tau_b is degenerate for every sample");
  return summarize(values, excluded);
}

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::data: return "data";
    case Estimator::pca: return "pca";
    case Estimator::cosine: return "cosine";
  }
  return "data";
}

Estimator estimator_from_string(std::string_view s) {
  if (s == "data") return Estimator::data;
  if (s == "pca") return Estimator::pca;
  if (s == "cosine") return Estimator::cosine;
  throw ValidationError("unknown estimator '" + std::string(s) + "' (expected data, pca or cosine)");
}

std::vector<ConvergenceRow> convergence_experiment(const TreeSpec& spec,
                                                   const std::vector<std::pair<std::size_t, std::size_t>>& grid,
                                                   Estimator estimator, const ConvergenceOptions& options) {
  spec.check();
  if (grid.empty()) throw ValidationError("convergence grid is empty");
  if (options.seeds == 0) throw ValidationError("convergence needs at least one seed");
  const TreeSpec cos_spec = estimator == Estimator::cosine ? normalize_leaf_heights(spec) : spec;
  const std::size_t rank = options.rank.value_or(support_affinity_rank(spec));
  if (estimator == Estimator::pca && rank == 0) throw ValidationError("PCA rank must be positive");

  std::vector<ConvergenceRow> rows;
  for (const auto& [n, p] : grid) {
    if (estimator == Estimator::cosine && n != cos_spec.support.size()) {
      throw ValidationError("the cosine estimator samples one point per leaf, so n must be " +
                            std::to_string(cos_spec.support.size()));
    }
    ConvergenceRow row{n, p, estimator, 0.0, 0.0, std::vector<double>(options.seeds)};
    parallel_for(options.seeds, [&, n = n, p = p](std::size_t s) {
      const std::uint64_t seed = options.base_seed + s;
      switch (estimator) {
        case Estimator::data: {
          const auto set = sample_additive(spec, n, p, seed);
          row.errors[s] = max_affinity_error(affinity_data(set.y), set.true_alpha);
          break;
        }
        case Estimator::pca: {
          const auto set = sample_additive(spec, n, p, seed);
          const std::size_t r = std::min({rank, n, p});
          row.errors[s] = max_affinity_error(affinity_pca(pc_scores(set.y, r), p), set.true_alpha);
          break;
        }
        case Estimator::cosine: {
          const auto set = sample_multiplicative(cos_spec, p, seed);
          row.errors[s] = max_affinity_error(affinity_cosine(set.y), set.true_alpha);
          break;
        }
      }
    });
    const double m = std::accumulate(row.errors.begin(), row.errors.end(), 0.0) / static_cast<double>(options.seeds);
    double ss = 0.0;
    for (double e : row.errors) ss += (e - m) * (e - m);
    row.mean_err = m;
    row.std_err = options.seeds > 1 ? std::sqrt(ss / static_cast<double>(options.seeds - 1)) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope needs at least two points");
  const std::size_t k = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    if (!(x[t] > 0.0) || !(y[t] > 0.0)) throw ValidationError("log-log slope needs positive values");
    mx += std::log(x[t]);
    my += std::log(y[t]);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    const double dx = std::log(x[t]) - mx;
    sxy += dx * (std::log(y[t]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw ValidationError("slope needs distinct x values");
  return sxy / sxx;
}

}  // namespace dphc
