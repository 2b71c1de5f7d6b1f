#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dphc/affinity.hpp"
#include "dphc/agglomerate.hpp"
#include "dphc/error.hpp"
#include "dphc/eval.hpp"
#include "dphc/genmodel.hpp"
#include "dphc/io.hpp"
#include "dphc/pipeline.hpp"
#include "dphc/spectral.hpp"

namespace py = pybind11;
using namespace dphc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DataMatrix to_data(const Array& a) {
  if (a.ndim() != 2) throw ValidationError("expected a 2-d array");
  const auto n = static_cast<std::size_t>(a.shape(0)), p = static_cast<std::size_t>(a.shape(1));
  return DataMatrix(n, p, std::vector<double>(a.data(), a.data() + n * p));
}

AffinityMatrix to_square(const Array& a, MatrixMode mode) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw ValidationError("expected a square 2-d array");
  const auto n = static_cast<std::size_t>(a.shape(0));
  return AffinityMatrix(n, mode, std::vector<double>(a.data(), a.data() + n * n));
}

Array to_array(std::span<const double> v, std::size_t rows, std::size_t cols) {
  Array out({rows, cols});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array square(const AffinityMatrix& m) { return to_array(m.values(), m.size(), m.size()); }

// (n - 1) x 4 linkage rows: a, b, value, size.
Array linkage(const MergeTrace& t) {
  Array out({t.steps.size(), std::size_t{4}});
  auto r = out.mutable_unchecked<2>();
  for (std::size_t m = 0; m < t.steps.size(); ++m) {
    r(m, 0) = static_cast<double>(t.steps[m].a);
    r(m, 1) = static_cast<double>(t.steps[m].b);
    r(m, 2) = t.steps[m].value;
    r(m, 3) = static_cast<double>(t.steps[m].size);
  }
  return out;
}

TreeSpec tree_from(const py::object& tree) {
  if (py::isinstance<py::str>(tree)) {
    const auto s = tree.cast<std::string>();
    if (s == "e1") return builtin_tree_e1();
    return io::tree_spec_from_json(s);
  }
  throw ValidationError("tree must be 'e1' or a tree spec JSON string");
}

py::dict cluster_result(const ClusterResult& r) {
  py::dict d;
  d["linkage"] = linkage(r.trace);
  d["dendrogram_json"] = io::dendrogram_to_json(r.dendrogram);
  d["newick"] = io::dendrogram_to_newick(r.dendrogram);
  d["negative_fraction"] = r.negative_fraction;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dphc, m) {
  m.doc() = "Hierarchical clustering with dot products";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("affinity_data", [](const Array& y) { return square(affinity_data(to_data(y))); }, py::arg("y"));
  m.def("affinity_cosine", [](const Array& y) { return square(affinity_cosine(to_data(y))); }, py::arg("y"));
  m.def(
      "affinity_pca",
      [](const Array& y, std::size_t r) {
        const auto data = to_data(y);
        return square(affinity_pca(pc_scores(data, r), data.cols()));
      },
      py::arg("y"), py::arg("r"));
  m.def(
      "select_rank",
      [](const Array& y, std::size_t r_max) {
        const auto sel = select_rank_wasserstein(to_data(y), r_max);
        return py::make_tuple(sel.r_hat, sel.curve);
      },
      py::arg("y"), py::arg("r_max"));

  m.def(
      "cluster_dot",
      [](const Array& affinity, const std::string& engine) {
        const Engine e = engine == "naive" ? Engine::naive : Engine::nn_chain;
        if (engine != "naive" && engine != "nn-chain") throw ValidationError("engine must be nn-chain or naive");
        return cluster_result(cluster_dot(to_square(affinity, MatrixMode::affinity), e));
      },
      py::arg("affinity"), py::arg("engine") = "nn-chain");
  m.def(
      "cluster",
      [](const Array& y, const std::string& method) {
        const auto data = to_data(y);
        return cluster_result(run_method(data, Method::parse(method), data.cols()));
      },
      py::arg("y"), py::arg("method") = "dot");

  m.def(
      "simulate",
      [](const py::object& tree, std::size_t n, std::size_t p, std::uint64_t seed) {
        const auto s = sample_additive(tree_from(tree), n, p, seed);
        py::dict d;
        d["y"] = to_array(s.y.values(), s.y.rows(), s.y.cols());
        d["z"] = s.z.z;
        d["true_affinity"] = square(s.true_alpha);
        d["truth_json"] = io::dendrogram_to_json(s.truth);
        return d;
      },
      py::arg("tree"), py::arg("n"), py::arg("p"), py::arg("seed") = 0);

  m.def(
      "kendall_tau_b",
      [](const std::vector<double>& x, const std::vector<double>& y) { return kendall_tau_b(x, y); }, py::arg("x"),
      py::arg("y"));
  m.def(
      "score_against_truth",
      [](const std::string& estimate_json, const std::string& truth_json, const std::vector<VertexId>& z) {
        const auto est = io::dendrogram_from_json(estimate_json);
        const auto truth = io::dendrogram_from_json(truth_json);
        const auto s = mean_tau_b(truth_rankings(truth, LeafAssignment{z}), est);
        return py::make_tuple(s.mean, s.stderr_, s.excluded);
      },
      py::arg("estimate_json"), py::arg("truth_json"), py::arg("z"));
}
