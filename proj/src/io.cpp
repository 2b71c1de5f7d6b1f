#include "dphc/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "dphc/error.hpp"
#include "json.hpp"

namespace dphc::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t parse_count(std::string_view s, const char* what) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError(std::string("cannot parse ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  auto out = open_out(path, std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  finish(out, path);
}

// --- dendrograms ---

std::string dendrogram_to_json(const Dendrogram& d) {
  // Heights are emitted as raw text so that they round-trip exactly.
  std::string s = "{\"orientation\":\"";
  s += d.orientation() == Orientation::affinity ? "affinity" : "distance";
  s += '"';
  if (d.augmented()) s += ",\"augmented\":true";
  s += ",\"nodes\":[";
  bool first = true;
  for (const Node& nd : d.nodes()) {
    if (!first) s += ',';
    first = false;
    s += "{\"id\":" + std::to_string(nd.id) + ",\"parent\":";
    s += nd.parent ? std::to_string(*nd.parent) : "null";
    s += ",\"height\":" + format_double(nd.height);
    if (nd.leaf_sample) s += ",\"leaf_sample\":" + std::to_string(*nd.leaf_sample);
    s += '}';
  }
  s += "]}\n";
  return s;
}

Dendrogram dendrogram_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed dendrogram JSON: ") + e.what());
  }
  try {
    Orientation orientation = Orientation::affinity;
    if (j.contains("orientation")) {
      const auto o = j.at("orientation").get<std::string>();
      if (o == "distance") {
        orientation = Orientation::distance;
      } else if (o != "affinity") {
        throw ValidationError("unknown orientation '" + o + "'");
      }
    }
    std::vector<Node> nodes;
    for (const auto& e : j.at("nodes")) {
      Node nd;
      nd.id = e.at("id").get<VertexId>();
      if (e.contains("parent") && !e.at("parent").is_null()) nd.parent = e.at("parent").get<VertexId>();
      nd.height = e.at("height").get<double>();
      if (e.contains("leaf_sample") && !e.at("leaf_sample").is_null()) {
        nd.leaf_sample = e.at("leaf_sample").get<std::size_t>();
      }
      nodes.push_back(nd);
    }
    Dendrogram d(std::move(nodes), orientation);
    if (j.value("augmented", false)) d.set_augmented(true);
    return d;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed dendrogram JSON: ") + e.what());
  }
}

void write_dendrogram(const fs::path& path, const Dendrogram& d) { write_text(path, dendrogram_to_json(d)); }

Dendrogram read_dendrogram(const fs::path& path) { return dendrogram_from_json(read_text(path)); }

std::string dendrogram_to_newick(const Dendrogram& d) {
  const std::size_t root = d.index_of(d.root());
  std::string out;
  auto label = [&](std::size_t v) {
    const Node& nd = d.nodes()[v];
    return nd.leaf_sample ? std::to_string(*nd.leaf_sample) : "v" + std::to_string(nd.id);
  };
  // Iterative post-order so that deep chains do not exhaust the stack.
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    const auto kids = d.child_indices(v);
    if (next == 0 && !kids.empty()) out += '(';
    if (next < kids.size()) {
      if (next > 0) out += ',';
      const std::size_t c = kids[next++];
      stack.push_back({c, 0});
      continue;
    }
    if (!kids.empty()) out += ')';
    out += label(v);
    if (auto p = d.parent_index(v)) {
      out += ':' + format_double(std::abs(d.nodes()[v].height - d.nodes()[*p].height));
    }
    stack.pop_back();
  }
  out += ";\n";
  return out;
}

// --- matrices ---

void write_matrix(const fs::path& path, const DataMatrix& y, MatrixFormat format) {
  if (format == MatrixFormat::csv) {
    auto out = open_out(path);
    out << y.rows() << ',' << y.cols() << '\n';
    std::string line;
    for (std::size_t i = 0; i < y.rows(); ++i) {
      line.clear();
      for (std::size_t j = 0; j < y.cols(); ++j) {
        if (j) line += ',';
        line += format_double(y(i, j));
      }
      line += '\n';
      out << line;
    }
    finish(out, path);
    return;
  }
  static_assert(std::endian::native == std::endian::little, "binary matrix IO assumes a little-endian host");
  auto out = open_out(path, std::ios::binary);
  out.write("DPHC", 4);
  const std::uint64_t dims[2] = {y.rows(), y.cols()};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(y.values().data()),
            static_cast<std::streamsize>(y.values().size() * sizeof(double)));
  finish(out, path);
}

DataMatrix read_matrix(const fs::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  probe.read(magic, 4);
  if (probe.gcount() == 4 && std::memcmp(magic, "DPHC", 4) == 0) {
    std::uint64_t dims[2] = {};
    probe.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!probe) throw IoError("truncated matrix header in " + path.string());
    const auto [n, p] = std::pair{dims[0], dims[1]};
    if (p != 0 && n > (std::uint64_t{1} << 40) / p) throw IoError("matrix dimensions too large in " + path.string());
    std::vector<double> values(n * p);
    probe.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (static_cast<std::size_t>(probe.gcount()) != values.size() * sizeof(double)) {
      throw IoError("truncated matrix data in " + path.string());
    }
    return DataMatrix(n, p, std::move(values));
  }
  probe.close();

  const auto lines = read_lines(path);
  if (lines.empty()) throw IoError("empty matrix file " + path.string());
  const auto head = split_csv(lines[0]);
  if (head.size() != 2) throw IoError("matrix CSV must start with 'n,p'");
  const std::size_t n = parse_count(head[0], "n");
  const std::size_t p = parse_count(head[1], "p");
  if (lines.size() != n + 1) {
    throw IoError("matrix CSV declares " + std::to_string(n) + " rows but has " + std::to_string(lines.size() - 1));
  }
  std::vector<double> values;
  values.reserve(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cells = split_csv(lines[i + 1]);
    if (cells.size() != p) throw IoError("matrix CSV row " + std::to_string(i) + " has " + std::to_string(cells.size()) + " values");
    for (const auto& c : cells) values.push_back(parse_double(c));
  }
  return DataMatrix(n, p, std::move(values));
}

void write_affinity(const fs::path& path, const AffinityMatrix& a) {
  auto out = open_out(path);
  out << a.size() << ',' << to_string(a.mode()) << '\n';
  std::string line;
  for (std::size_t i = 0; i < a.size(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (j) line += ',';
      line += format_double(a(i, j));
    }
    line += '\n';
    out << line;
  }
  finish(out, path);
}

AffinityMatrix read_affinity(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw IoError("empty affinity file " + path.string());
  const auto head = split_csv(lines[0]);
  if (head.size() != 2) throw IoError("affinity CSV must start with 'n,mode'");
  const std::size_t n = parse_count(head[0], "n");
  const MatrixMode mode = matrix_mode_from_string(head[1]);
  if (lines.size() != n + 1) throw IoError("affinity CSV has the wrong number of rows");
  std::vector<double> values;
  values.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cells = split_csv(lines[i + 1]);
    if (cells.size() != n) throw IoError("affinity CSV row " + std::to_string(i) + " has the wrong length");
    for (const auto& c : cells) values.push_back(parse_double(c));
  }
  return AffinityMatrix(n, mode, std::move(values));
}

// --- assignments and labels ---

void write_assignment(const fs::path& path, const LeafAssignment& z) {
  auto out = open_out(path);
  out << "sample,vertex\n";
  for (std::size_t i = 0; i < z.size(); ++i) out << i << ',' << z.z[i] << '\n';
  finish(out, path);
}

LeafAssignment read_assignment(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "sample,vertex") throw IoError("assignment CSV must start with 'sample,vertex'");
  LeafAssignment z;
  z.z.resize(lines.size() - 1);
  std::vector<bool> seen(z.z.size(), false);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split_csv(lines[k]);
    if (cells.size() != 2) throw IoError("assignment CSV line " + std::to_string(k + 1) + " needs two fields");
    const std::size_t i = parse_count(cells[0], "sample");
    if (i >= z.z.size() || seen[i]) throw IoError("assignment CSV has a bad or repeated sample " + cells[0]);
    seen[i] = true;
    VertexId v = 0;
    const auto res = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), v);
    if (res.ec != std::errc()) throw IoError("cannot parse vertex '" + cells[1] + "'");
    z.z[i] = v;
  }
  return z;
}

LabelHierarchy read_labels(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw IoError("empty label file " + path.string());
  const std::size_t levels = split_csv(lines[0]).size();
  LabelHierarchy h;
  h.levels.assign(levels, {});
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split_csv(lines[k]);
    if (cells.size() != levels) throw IoError("label file line " + std::to_string(k + 1) + " has the wrong number of fields");
    for (std::size_t l = 0; l < levels; ++l) h.levels[l].push_back(cells[l]);
  }
  return h;
}

void write_labels(const fs::path& path, const LabelHierarchy& h) {
  auto out = open_out(path);
  for (std::size_t l = 0; l < h.levels.size(); ++l) out << (l ? "," : "") << "level" << l;
  out << '\n';
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t l = 0; l < h.levels.size(); ++l) out << (l ? "," : "") << h.levels[l][i];
    out << '\n';
  }
  finish(out, path);
}

// --- tree specs ---

TreeSpec tree_spec_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    TreeSpec spec;
    spec.root_variance = j.at("root_variance").get<double>();
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw ValidationError("each edge must be [parent, child, variance]");
      spec.edges.push_back({e[0].get<VertexId>(), e[1].get<VertexId>(), e[2].get<double>()});
    }
    spec.support = j.at("support").get<std::vector<VertexId>>();
    if (j.contains("weights")) {
      spec.weights = j.at("weights").get<std::vector<double>>();
    } else {
      spec.weights.assign(spec.support.size(), spec.support.empty() ? 0.0 : 1.0 / static_cast<double>(spec.support.size()));
    }
    spec.sigma = j.value("sigma", 0.0);
    if (j.contains("gamma")) {
      spec.gamma.log_mean = j.at("gamma").value("log_mean", 0.0);
      spec.gamma.log_sd = j.at("gamma").value("log_sd", 0.25);
    }
    if (j.contains("root")) spec.root = j.at("root").get<VertexId>();
    spec.check();
    return spec;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed tree spec JSON: ") + e.what());
  }
}

std::string tree_spec_to_json(const TreeSpec& spec) {
  json j;
  j["root_variance"] = spec.root_variance;
  j["edges"] = json::array();
  for (const auto& e : spec.edges) j["edges"].push_back({e.parent, e.child, e.variance});
  j["support"] = spec.support;
  j["weights"] = spec.weights;
  j["sigma"] = spec.sigma;
  j["gamma"] = {{"log_mean", spec.gamma.log_mean}, {"log_sd", spec.gamma.log_sd}};
  if (spec.root) j["root"] = *spec.root;
  return j.dump(2) + "\n";
}

TreeSpec read_tree_spec(const fs::path& path) { return tree_spec_from_json(read_text(path)); }

// --- linkage and rank curves ---

namespace {

void write_linkage_rows(const fs::path& path, const MergeTrace& trace, const double* max_entry) {
  auto out = open_out(path);
  for (const auto& s : trace.steps) {
    const double v = max_entry ? *max_entry - s.value : s.value;
    out << s.a << ',' << s.b << ',' << format_double(v) << ',' << s.size << '\n';
  }
  finish(out, path);
}

}  // namespace

void write_linkage(const fs::path& path, const MergeTrace& trace) { write_linkage_rows(path, trace, nullptr); }

void write_linkage_distance(const fs::path& path, const MergeTrace& trace, double max_entry) {
  write_linkage_rows(path, trace, &max_entry);
}

MergeTrace read_linkage(const fs::path& path) {
  const auto lines = read_lines(path);
  MergeTrace t;
  t.n = lines.size() + 1;
  for (const auto& line : lines) {
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw IoError("linkage rows need four fields");
    t.steps.push_back({parse_count(cells[0], "cluster id"), parse_count(cells[1], "cluster id"), parse_double(cells[2]),
                       parse_count(cells[3], "size")});
  }
  return t;
}

void write_rank_curve(const fs::path& path, const RankSelection& sel) {
  auto out = open_out(path);
  out << "r,d_r\n";
  for (const auto& [r, d] : sel.curve) out << r << ',' << format_double(d) << '\n';
  out << "r_hat," << sel.r_hat << '\n';
  finish(out, path);
}

}  // namespace dphc::io
