#include "dphc/pipeline.hpp"

#include "dphc/error.hpp"

namespace dphc {

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::dot: return "dot";
    case Measure::cosine: return "cosine";
    case Measure::euclidean: return "euclidean";
    case Measure::sqeuclidean: return "sqeuclidean";
    case Measure::manhattan: return "manhattan";
  }
  return "dot";
}

Method Method::parse(std::string_view name) {
  const std::string full(name);
  if (name == "ward") return {Measure::sqeuclidean, Linkage::ward};
  Method m;
  if (name.starts_with("complete-")) {
    m.linkage = Linkage::complete;
    name.remove_prefix(9);
  } else if (name.starts_with("single-")) {
    m.linkage = Linkage::single;
    name.remove_prefix(7);
  }
  if (name == "dot") {
    m.measure = Measure::dot;
  } else if (name == "cosine") {
    m.measure = Measure::cosine;
  } else if (name == "euclidean") {
    m.measure = Measure::euclidean;
  } else if (name == "manhattan") {
    m.measure = Measure::manhattan;
  } else {
    throw ValidationError("unknown method '" + full +
                          "' (expected dot, cosine, euclidean, manhattan or ward, with an optional "
                          "complete- or single- prefix)");
  }
  return m;
}

std::string Method::name() const {
  if (linkage == Linkage::ward) return "ward";
  std::string prefix = linkage == Linkage::average ? "" : std::string(to_string(linkage)) + "-";
  return prefix + std::string(to_string(measure));
}

Objective Method::objective() const {
  return measure == Measure::dot || measure == Measure::cosine ? Objective::max_affinity : Objective::min_distance;
}

void check_compatible(Measure measure, Linkage linkage) {
  if (linkage == Linkage::ward && measure != Measure::sqeuclidean) {
    throw ValidationError("ward linkage needs squared Euclidean distances, not " + std::string(to_string(measure)));
  }
}

AffinityMatrix measure_matrix(const DataMatrix& y, Measure measure, std::size_t ambient_p) {
  switch (measure) {
    case Measure::dot: {
      AffinityMatrix a = affinity_data(y);
      if (ambient_p == y.cols()) return a;
      const double scale = static_cast<double>(y.cols()) / static_cast<double>(ambient_p);
      std::vector<double> v(a.values().begin(), a.values().end());
      for (double& x : v) x *= scale;
      return AffinityMatrix(a.size(), MatrixMode::affinity, std::move(v));
    }
    case Measure::cosine: return affinity_cosine(y);
    case Measure::euclidean: return pairwise_distance(y, Metric::euclidean);
    case Measure::sqeuclidean: return pairwise_distance(y, Metric::sqeuclidean);
    case Measure::manhattan: return pairwise_distance(y, Metric::manhattan);
  }
  throw ValidationError("unknown measure");
}

ClusterResult run_method(const DataMatrix& y, const Method& method, std::size_t ambient_p, Engine engine) {
  check_compatible(method.measure, method.linkage);
  return cluster_generic(measure_matrix(y, method.measure, ambient_p), method.linkage, method.objective(), engine);
}

DataMatrix scores_as_data(const ScoreMatrix& s) {
  return DataMatrix(s.rows(), s.rank(), std::vector<double>(s.values().begin(), s.values().end()));
}

std::vector<TiedRanking> truth_rankings(const Dendrogram& truth, const LeafAssignment& z) {
  std::vector<double> heights(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) heights[i] = truth.height(z.z[i]);
  return rank_all_from_dendrogram(augment(truth, z, heights));
}

}  // namespace dphc
