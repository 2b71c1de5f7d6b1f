// dphc command-line front end: simulate, cluster, evaluate, compare, convergence.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dphc/affinity.hpp"
#include "dphc/agglomerate.hpp"
#include "dphc/dendrogram.hpp"
#include "dphc/error.hpp"
#include "dphc/eval.hpp"
#include "dphc/genmodel.hpp"
#include "dphc/io.hpp"
#include "dphc/pipeline.hpp"
#include "dphc/spectral.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace dphc;
using nlohmann::ordered_json;

namespace {

TreeSpec load_spec(const std::string& tree) {
  if (tree == "e1") return builtin_tree_e1();
  return io::read_tree_spec(tree);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto& item : io::split_csv(s)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Ground truth for evaluate and compare: a label file or a true dendrogram
// plus assignment.
struct TruthArgs {
  std::string labels;
  std::string truth;
  std::string assignment;
};

void add_truth_options(CLI::App* cmd, TruthArgs& t) {
  auto* labels = cmd->add_option("--labels", t.labels, "label hierarchy CSV (coarse to fine columns)");
  auto* truth = cmd->add_option("--truth", t.truth, "true dendrogram JSON");
  auto* assign = cmd->add_option("--assignment", t.assignment, "sample to vertex assignment CSV");
  truth->needs(assign);
  assign->needs(truth);
  labels->excludes(truth);
  labels->excludes(assign);
}

std::vector<TiedRanking> load_truth(const TruthArgs& t, std::size_t n) {
  if (!t.labels.empty()) {
    const auto h = io::read_labels(t.labels);
    h.check();
    if (h.size() != n) {
      throw ValidationError("label file has " + std::to_string(h.size()) + " samples but the input has " +
                            std::to_string(n));
    }
    return rank_all_from_labels(h);
  }
  if (t.truth.empty()) throw ValidationError("give --labels or --truth with --assignment");
  const auto truth = io::read_dendrogram(t.truth);
  const auto z = io::read_assignment(t.assignment);
  if (z.size() != n) {
    throw ValidationError("assignment has " + std::to_string(z.size()) + " samples but the input has " +
                          std::to_string(n));
  }
  return truth_rankings(truth, z);
}

std::size_t resolve_rank(const DataMatrix& y, std::optional<std::size_t> r, std::optional<std::size_t> r_max,
                         std::optional<std::uint64_t> split_seed, std::optional<RankSelection>& selection) {
  if (r) {
    if (*r == 0 || *r > std::min(y.rows(), y.cols())) {
      throw ValidationError("--r must lie in [1, " + std::to_string(std::min(y.rows(), y.cols())) + "]");
    }
    return *r;
  }
  if (!r_max) throw ValidationError("pca needs --r, or --r-max for Wasserstein rank selection");
  selection = split_seed ? select_rank_wasserstein(shuffle_rows(y, *split_seed), *r_max) : select_rank_wasserstein(y, *r_max);
  return selection->r_hat;
}

// --- simulate ---

struct SimulateArgs {
  std::string tree;
  std::size_t n = 0;
  std::size_t p = 0;
  std::optional<double> sigma;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::string model = "additive";
};

int cmd_simulate(const SimulateArgs& a) {
  TreeSpec spec = load_spec(a.tree);
  if (a.sigma) spec.sigma = *a.sigma;
  SampleSet set = [&] {
    if (a.model == "additive") return sample_additive(spec, a.n, a.p, a.seed);
    const TreeSpec norm = normalize_leaf_heights(spec);
    if (a.n != 0 && a.n != norm.support.size()) {
      throw ValidationError("the multiplicative model draws one sample per leaf; omit --n or pass " +
                            std::to_string(norm.support.size()));
    }
    return sample_multiplicative(norm, a.p, a.seed);
  }();
  const fs::path dir(a.out);
  ensure_dir(dir);
  const bool binary = a.format == "binary";
  io::write_matrix(dir / (binary ? "data.bin" : "data.csv"), set.y, binary ? io::MatrixFormat::binary : io::MatrixFormat::csv);
  io::write_assignment(dir / "assignment.csv", set.z);
  io::write_dendrogram(dir / "truth.json", set.truth);
  io::write_affinity(dir / "true_affinity.csv", set.true_alpha);
  std::cout << "wrote " << set.y.rows() << "x" << set.y.cols() << " sample to " << dir.string() << "\n";
  return 0;
}

// --- cluster ---

struct ClusterArgs {
  std::string matrix;
  std::string estimator = "data";
  std::string linkage = "average";
  std::string engine = "nn-chain";
  std::optional<std::size_t> r;
  std::optional<std::size_t> r_max;
  std::optional<std::uint64_t> split_seed;
  std::string out;
};

int cmd_cluster(const ClusterArgs& a) {
  const DataMatrix y = io::read_matrix(a.matrix);
  const Linkage linkage = linkage_from_string(a.linkage);
  const Engine engine = a.engine == "naive" ? Engine::naive : Engine::nn_chain;

  Measure measure = Measure::dot;
  bool pca = false;
  if (a.estimator == "data") {
    measure = Measure::dot;
  } else if (a.estimator == "pca") {
    measure = Measure::dot;
    pca = true;
  } else if (a.estimator == "cosine") {
    measure = Measure::cosine;
  } else if (a.estimator == "euclidean") {
    measure = Measure::euclidean;
  } else if (a.estimator == "sqeuclidean") {
    measure = Measure::sqeuclidean;
  } else if (a.estimator == "manhattan") {
    measure = Measure::manhattan;
  } else {
    throw ValidationError("unknown estimator '" + a.estimator + "'");
  }
  check_compatible(measure, linkage);
  if (!pca && (a.r || a.r_max)) throw ValidationError("--r and --r-max only apply to the pca estimator");

  std::optional<RankSelection> selection;
  std::optional<std::size_t> rank;
  AffinityMatrix mat;
  if (pca) {
    rank = resolve_rank(y, a.r, a.r_max, a.split_seed, selection);
    mat = affinity_pca(pc_scores(y, *rank), y.cols());
  } else {
    mat = measure_matrix(y, measure, y.cols());
  }
  const Method method{measure, linkage};
  const ClusterResult res = cluster_generic(mat, linkage, method.objective(), engine);

  const fs::path dir(a.out);
  ensure_dir(dir);
  io::write_dendrogram(dir / "dendrogram.json", res.dendrogram);
  io::write_text(dir / "dendrogram.nwk", io::dendrogram_to_newick(res.dendrogram));
  io::write_linkage(dir / "linkage.csv", res.trace);
  double max_entry = 0.0;
  if (method.objective() == Objective::max_affinity) {
    max_entry = *std::max_element(mat.values().begin(), mat.values().end());
    io::write_linkage_distance(dir / "linkage_distance.csv", res.trace, max_entry);
  } else {
    io::write_linkage(dir / "linkage_distance.csv", res.trace);
  }
  if (selection) io::write_rank_curve(dir / "rank_curve.csv", *selection);

  ordered_json meta;
  meta["estimator"] = a.estimator;
  meta["linkage"] = std::string(to_string(linkage));
  meta["engine"] = engine == Engine::naive ? "naive" : "nn-chain";
  meta["n"] = y.rows();
  meta["p"] = y.cols();
  meta["orientation"] = method.objective() == Objective::max_affinity ? "affinity" : "distance";
  if (rank) {
    meta["r"] = *rank;
    meta["r_source"] = selection ? "wasserstein" : "flag";
    if (selection && a.split_seed) meta["split_seed"] = *a.split_seed;
  }
  if (method.objective() == Objective::max_affinity) {
    meta["negative_fraction"] = res.negative_fraction;
    meta["distance_transform_max"] = max_entry;
  }
  io::write_text(dir / "metadata.json", meta.dump(2) + "\n");
  if (res.negative_fraction > 0.1) {
    std::cerr << "warning: " << res.negative_fraction * 100
              << "% of affinities are negative; the latent tree model may fit poorly\n";
  }
  std::cout << "clustered " << y.rows() << " samples into " << dir.string() << "\n";
  return 0;
}

// --- evaluate ---

struct EvaluateArgs {
  std::string dendrogram;
  TruthArgs truth;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const Dendrogram est = io::read_dendrogram(a.dendrogram);
  const std::size_t n = est.sample_count();
  const auto rankings = load_truth(a.truth, n);
  const TauSummary tau = mean_tau_b(rankings, est);
  ordered_json report;
  report["mean_tau_b"] = tau.mean;
  report["stderr"] = tau.stderr_;
  report["used"] = tau.used;
  report["excluded"] = tau.excluded;
  std::cout << "mean tau_b " << io::format_double(tau.mean) << " +/- " << io::format_double(tau.stderr_) << " ("
            << tau.excluded << " degenerate samples excluded)\n";
  if (!a.truth.truth.empty()) {
    if (est.orientation() == Orientation::affinity) {
      const auto truth = io::read_dendrogram(a.truth.truth);
      const auto z = io::read_assignment(a.truth.assignment);
      const double dist = merge_distortion(truth, z, est);
      report["merge_distortion"] = dist;
      std::cout << "merge distortion " << io::format_double(dist) << "\n";
    } else {
      std::cout << "merge distortion skipped: the estimate is distance-oriented\n";
    }
  }
  if (!a.out.empty()) io::write_text(a.out, report.dump(2) + "\n");
  return 0;
}

// --- compare ---

struct CompareArgs {
  std::string matrix;
  TruthArgs truth;
  std::string methods = "dot,cosine,euclidean,ward";
  std::string inputs = "raw";
  std::optional<std::size_t> r;
  std::optional<std::size_t> r_max;
  std::optional<std::uint64_t> split_seed;
  std::string out;
};

int cmd_compare(const CompareArgs& a) {
  std::vector<Method> methods;
  std::set<std::string> seen;
  for (const auto& name : split_list(a.methods)) {
    const Method m = Method::parse(name);
    if (!seen.insert(m.name()).second) {
      std::cerr << "warning: method '" << name << "' listed twice; running it once\n";
      continue;
    }
    methods.push_back(m);
  }
  if (methods.empty()) throw ValidationError("the method list is empty");
  std::vector<std::string> inputs;
  for (const auto& in : split_list(a.inputs)) {
    if (in != "raw" && in != "pca") throw ValidationError("unknown input '" + in + "' (expected raw or pca)");
    if (std::find(inputs.begin(), inputs.end(), in) == inputs.end()) inputs.push_back(in);
  }
  if (inputs.empty()) throw ValidationError("the input list is empty");

  const DataMatrix y = io::read_matrix(a.matrix);
  const auto rankings = load_truth(a.truth, y.rows());
  std::optional<DataMatrix> scores;
  std::optional<RankSelection> selection;
  if (std::find(inputs.begin(), inputs.end(), "pca") != inputs.end()) {
    const std::size_t r = resolve_rank(y, a.r, a.r_max, a.split_seed, selection);
    scores = scores_as_data(pc_scores(y, r));
  }

  std::ostringstream csv;
  csv << "method,input,mean_tau_b,stderr,excluded\n";
  for (const auto& in : inputs) {
    const DataMatrix& data = in == "raw" ? y : *scores;
    for (const auto& m : methods) {
      const auto res = run_method(data, m, y.cols());
      const TauSummary tau = mean_tau_b(rankings, res.dendrogram);
      csv << m.name() << ',' << in << ',' << io::format_double(tau.mean) << ',' << io::format_double(tau.stderr_)
          << ',' << tau.excluded << '\n';
    }
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    io::write_text(a.out, csv.str());
    std::cout << csv.str();
  }
  return 0;
}

// --- convergence ---

struct ConvergenceArgs {
  std::string tree;
  std::string grid;
  std::string estimators = "data,pca";
  std::size_t seeds = 100;
  std::uint64_t seed = 0;
  std::optional<std::size_t> r;
  std::optional<double> sigma;
  std::string out;
  std::string plot;
};

std::vector<std::pair<std::size_t, std::size_t>> parse_grid(const std::string& s) {
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  for (const auto& item : split_list(s)) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw ValidationError("grid points look like NxP, got '" + item + "'");
    try {
      grid.emplace_back(std::stoull(item.substr(0, x)), std::stoull(item.substr(x + 1)));
    } catch (const std::exception&) {
      throw ValidationError("grid points look like NxP, got '" + item + "'");
    }
  }
  if (grid.empty()) throw ValidationError("the convergence grid is empty");
  return grid;
}

int cmd_convergence(const ConvergenceArgs& a) {
  TreeSpec spec = load_spec(a.tree);
  if (a.sigma) spec.sigma = *a.sigma;
  const auto grid = parse_grid(a.grid);
  if (a.seeds == 0) throw ValidationError("--seeds must be at least 1");
  std::vector<Estimator> estimators;
  for (const auto& e : split_list(a.estimators)) {
    const Estimator est = estimator_from_string(e);
    if (std::find(estimators.begin(), estimators.end(), est) == estimators.end()) estimators.push_back(est);
  }
  if (estimators.empty()) throw ValidationError("the estimator list is empty");

  ConvergenceOptions opt;
  opt.seeds = a.seeds;
  opt.base_seed = a.seed;
  opt.rank = a.r;
  std::ostringstream csv, plot;
  csv << "n,p,estimator,mean_err,std_err_err\n";
  plot << "n,p,estimator,seed,max_err\n";
  for (const Estimator est : estimators) {
    for (const auto& row : convergence_experiment(spec, grid, est, opt)) {
      csv << row.n << ',' << row.p << ',' << to_string(est) << ',' << io::format_double(row.mean_err) << ','
          << io::format_double(row.std_err) << '\n';
      for (std::size_t s = 0; s < row.errors.size(); ++s) {
        plot << row.n << ',' << row.p << ',' << to_string(est) << ',' << a.seed + s << ','
             << io::format_double(row.errors[s]) << '\n';
      }
    }
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    io::write_text(a.out, csv.str());
  }
  if (!a.plot.empty()) io::write_text(a.plot, plot.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical clustering with dot products"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dphc 0.1.0");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a sample from a latent tree model");
  simulate->add_option("tree", sim.tree, "'e1' or a tree spec JSON")->required();
  simulate->add_option("--n", sim.n, "number of samples (additive model)");
  simulate->add_option("--p", sim.p, "dimension")->required();
  simulate->add_option("--sigma", sim.sigma, "noise level (overrides the spec)");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--format", sim.format, "matrix file format")->check(CLI::IsMember({"csv", "binary"}));
  simulate->add_option("--model", sim.model, "generative model")->check(CLI::IsMember({"additive", "multiplicative"}));

  ClusterArgs clu;
  auto* cluster = app.add_subcommand("cluster", "Build a dendrogram from a data matrix");
  cluster->add_option("matrix", clu.matrix, "matrix file (CSV or binary)")->required()->check(CLI::ExistingFile);
  cluster->add_option("--estimator", clu.estimator, "data, pca, cosine, euclidean, sqeuclidean or manhattan");
  cluster->add_option("--linkage", clu.linkage, "average, complete, single or ward");
  cluster->add_option("--engine", clu.engine, "merge engine")->check(CLI::IsMember({"nn-chain", "naive"}));
  cluster->add_option("--r", clu.r, "PCA rank");
  cluster->add_option("--r-max", clu.r_max, "largest rank tried by Wasserstein selection");
  cluster->add_option("--split-seed", clu.split_seed, "shuffle rows with this seed before the rank-selection split");
  cluster->add_option("--out", clu.out, "output directory")->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a dendrogram against ground truth");
  evaluate->add_option("dendrogram", ev.dendrogram, "dendrogram JSON")->required()->check(CLI::ExistingFile);
  add_truth_options(evaluate, ev.truth);
  evaluate->add_option("--out", ev.out, "report JSON");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Kendall tau_b table over methods and inputs");
  compare->add_option("matrix", cmp.matrix, "matrix file")->required()->check(CLI::ExistingFile);
  add_truth_options(compare, cmp.truth);
  compare->add_option("--methods", cmp.methods, "comma-separated method names");
  compare->add_option("--inputs", cmp.inputs, "comma-separated inputs: raw, pca");
  compare->add_option("--r", cmp.r, "PCA rank");
  compare->add_option("--r-max", cmp.r_max, "largest rank tried by Wasserstein selection");
  compare->add_option("--split-seed", cmp.split_seed, "shuffle rows with this seed before the rank-selection split");
  compare->add_option("--out", cmp.out, "results CSV");

  ConvergenceArgs conv;
  auto* convergence = app.add_subcommand("convergence", "Affinity error against n and p");
  convergence->add_option("tree", conv.tree, "'e1' or a tree spec JSON")->required();
  convergence->add_option("--grid", conv.grid, "comma-separated NxP points")->required();
  convergence->add_option("--estimators", conv.estimators, "data, pca, cosine");
  convergence->add_option("--seeds", conv.seeds, "simulations per grid point");
  convergence->add_option("--seed", conv.seed, "first seed");
  convergence->add_option("--r", conv.r, "PCA rank (default: rank of the support affinities)");
  convergence->add_option("--sigma", conv.sigma, "noise level (overrides the spec)");
  convergence->add_option("--out", conv.out, "results CSV (stdout if omitted)");
  convergence->add_option("--plot", conv.plot, "long-format per-seed CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*cluster) return cmd_cluster(clu);
    if (*evaluate) return cmd_evaluate(ev);
    if (*compare) return cmd_compare(cmp);
    if (*convergence) return cmd_convergence(conv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 4;
  }
  return 2;
}
