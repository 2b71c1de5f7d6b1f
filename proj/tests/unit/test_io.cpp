#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unistd.h>

#include "doctest.h"
#include "dphc/error.hpp"
#include "dphc/io.hpp"
#include "testing.hpp"

using namespace dphc;
using namespace dphc::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dphc_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
  static inline int counter = 0;
};

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("doubles round trip through text") {
  Rng rng(71);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::ldexp(uniform(rng, -1.0, 1.0), static_cast<int>(pick(rng, 200)) - 100);
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::parse_double(io::format_double(std::numeric_limits<double>::denorm_min())) ==
        std::numeric_limits<double>::denorm_min());
  CHECK_THROWS_AS(io::parse_double("1.5x"), IoError);
  CHECK_THROWS_AS(io::parse_double(""), IoError);
}

TEST_CASE("csv splitting") {
  CHECK(io::split_csv("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(io::split_csv("x") == std::vector<std::string>{"x"});
  CHECK(io::split_csv("1,2\r") == std::vector<std::string>{"1", "2"});
}

TEST_CASE("dendrogram json round trip") {
  Rng rng(72);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = random_binary_tree(rng, 2 + pick(rng, 30));
    const auto back = io::dendrogram_from_json(io::dendrogram_to_json(d));
    CHECK(equivalent(d, back, 0.0));
    CHECK(back.orientation() == d.orientation());
  }
  const auto t = random_tree(rng, 12, 0.1);
  std::vector<Node> nodes(t.nodes().begin(), t.nodes().end());
  const Dendrogram dist(nodes, Orientation::distance);
  const auto back = io::dendrogram_from_json(io::dendrogram_to_json(dist));
  CHECK(back.orientation() == Orientation::distance);
  CHECK(back.size() == dist.size());
  for (const auto& nd : dist.nodes()) CHECK(back.height(nd.id) == nd.height);

  CHECK_THROWS_AS(io::dendrogram_from_json("{"), IoError);
  CHECK_THROWS_AS(io::dendrogram_from_json(R"({"nodes": [{"id": 0, "parent": 7, "height": 1}]})"), Error);
}

TEST_CASE("newick output") {
  std::vector<Node> nodes(3);
  nodes[0] = {0, 2, 3.0, 0};
  nodes[1] = {1, 2, 2.5, 1};
  nodes[2] = {2, std::nullopt, 1.0, std::nullopt};
  const auto s = io::dendrogram_to_newick(Dendrogram(nodes));
  CHECK(s == "(0:2,1:1.5)v2;\n");
}

TEST_CASE("matrix files") {
  TempDir dir;
  Rng rng(73);
  const auto y = gaussian_matrix(rng, 7, 5);
  io::write_matrix(dir / "y.csv", y, io::MatrixFormat::csv);
  io::write_matrix(dir / "y.bin", y, io::MatrixFormat::binary);
  for (const char* name : {"y.csv", "y.bin"}) {
    const auto back = io::read_matrix(dir / name);
    REQUIRE(back.rows() == 7);
    REQUIRE(back.cols() == 5);
    CHECK(std::memcmp(back.values().data(), y.values().data(), 35 * sizeof(double)) == 0);
  }
  const auto raw = bytes(dir / "y.bin");
  CHECK(raw.size() == 4 + 16 + 35 * 8);
  CHECK(raw.substr(0, 4) == "DPHC");
  std::uint64_t n = 0;
  std::memcpy(&n, raw.data() + 4, 8);
  CHECK(n == 7);
  double first = 0;
  std::memcpy(&first, raw.data() + 20, 8);
  CHECK(first == y(0, 0));

  io::write_text(dir / "short.csv", "2,2\n1,2\n3\n");
  CHECK_THROWS_AS(io::read_matrix(dir / "short.csv"), IoError);
  io::write_text(dir / "bad.csv", "2,2\n1,2\n3,x\n");
  CHECK_THROWS_AS(io::read_matrix(dir / "bad.csv"), IoError);
  io::write_text(dir / "trunc.bin", raw.substr(0, 40));
  CHECK_THROWS_AS(io::read_matrix(dir / "trunc.bin"), IoError);
  CHECK_THROWS_AS(io::read_matrix(dir / "missing.csv"), IoError);
}

TEST_CASE("affinity, assignment and label files") {
  TempDir dir;
  AffinityMatrix a(3, MatrixMode::distance);
  a.set(0, 1, 0.1);
  a.set(1, 2, 1.0 / 3.0);
  io::write_affinity(dir / "a.csv", a);
  const auto ab = io::read_affinity(dir / "a.csv");
  CHECK(ab.mode() == MatrixMode::distance);
  CHECK(std::memcmp(ab.values().data(), a.values().data(), 9 * sizeof(double)) == 0);

  LeafAssignment z{{4, 4, -2, 17}};
  io::write_assignment(dir / "z.csv", z);
  CHECK(io::read_assignment(dir / "z.csv").z == z.z);
  CHECK(bytes(dir / "z.csv").rfind("sample,vertex\n", 0) == 0);

  LabelHierarchy h;
  h.levels = {{"a", "a", "b"}, {"x", "y", "z"}};
  io::write_labels(dir / "l.csv", h);
  CHECK(io::read_labels(dir / "l.csv").levels == h.levels);
  io::write_text(dir / "ragged.csv", "coarse,fine\na,x\nb\n");
  CHECK_THROWS_AS(io::read_labels(dir / "ragged.csv"), IoError);
}

TEST_CASE("tree spec json") {
  const auto e1 = builtin_tree_e1();
  const auto back = io::tree_spec_from_json(io::tree_spec_to_json(e1));
  CHECK(back.root_variance == e1.root_variance);
  CHECK(back.support == e1.support);
  CHECK(back.weights == e1.weights);
  CHECK(back.sigma == e1.sigma);
  REQUIRE(back.edges.size() == e1.edges.size());
  for (std::size_t k = 0; k < e1.edges.size(); ++k) {
    CHECK(back.edges[k].parent == e1.edges[k].parent);
    CHECK(back.edges[k].child == e1.edges[k].child);
    CHECK(back.edges[k].variance == e1.edges[k].variance);
  }

  // Defaults: uniform weights and no noise.
  const auto minimal = io::tree_spec_from_json(R"({"root_variance": 1, "edges": [[0, 1, 2], [0, 2, 3]], "support": [1, 2]})");
  CHECK(minimal.weights == std::vector<double>{0.5, 0.5});
  CHECK(minimal.sigma == 0.0);
  const auto with_gamma = io::tree_spec_from_json(
      R"({"root_variance": 0, "edges": [[0, 1, 1]], "support": [1], "gamma": {"log_mean": 0.5, "log_sd": 0.1}})");
  CHECK(with_gamma.gamma.log_mean == 0.5);
  CHECK(with_gamma.gamma.log_sd == 0.1);
  CHECK_THROWS_AS(io::tree_spec_from_json(R"({"edges": "nope"})"), Error);
}

TEST_CASE("linkage files") {
  TempDir dir;
  MergeTrace t;
  t.n = 3;
  t.steps = {{0, 1, 2.5, 2}, {2, 3, 0.5, 3}};
  io::write_linkage(dir / "l.csv", t);
  CHECK(bytes(dir / "l.csv") == "0,1,2.5,2\n2,3,0.5,3\n");
  const auto back = io::read_linkage(dir / "l.csv");
  CHECK(back.n == 3);
  REQUIRE(back.steps.size() == 2);
  CHECK(back.steps[1].b == 3);
  CHECK(back.steps[1].value == 0.5);
  io::write_linkage_distance(dir / "ld.csv", t, 3.0);
  CHECK(bytes(dir / "ld.csv") == "0,1,0.5,2\n2,3,2.5,3\n");
}

TEST_CASE("rank curve file") {
  TempDir dir;
  RankSelection sel;
  sel.r_hat = 2;
  sel.curve = {{1, 3.0}, {2, 1.5}, {3, 2.0}};
  io::write_rank_curve(dir / "r.csv", sel);
  CHECK(bytes(dir / "r.csv") == "r,d_r\n1,3\n2,1.5\n3,2\nr_hat,2\n");
}
