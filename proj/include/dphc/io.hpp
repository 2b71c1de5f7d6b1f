#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dphc/affinity.hpp"
#include "dphc/agglomerate.hpp"
#include "dphc/dendrogram.hpp"
#include "dphc/eval.hpp"
#include "dphc/genmodel.hpp"
#include "dphc/spectral.hpp"

namespace dphc::io {

namespace fs = std::filesystem;

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

// {"orientation": "affinity"|"distance", "nodes": [{"id", "parent", "height",
// "leaf_sample"}...]}; parent is null for the root and leaf_sample is present
// only on sample leaves.
std::string dendrogram_to_json(const Dendrogram& d);
Dendrogram dendrogram_from_json(std::string_view text);
void write_dendrogram(const fs::path& path, const Dendrogram& d);
Dendrogram read_dendrogram(const fs::path& path);

// Sample leaves are named by sample index, other vertices v<id>. Branch
// lengths are height gaps.
std::string dendrogram_to_newick(const Dendrogram& d);

// CSV: first line "n,p", then n rows of p values. Binary: "DPHC", n and p as
// little-endian uint64, then n*p little-endian doubles, row-major.
enum class MatrixFormat { csv, binary };
void write_matrix(const fs::path& path, const DataMatrix& y, MatrixFormat format);
// Detects the format from the first four bytes.
DataMatrix read_matrix(const fs::path& path);

// First line "n,mode", then n rows.
void write_affinity(const fs::path& path, const AffinityMatrix& a);
AffinityMatrix read_affinity(const fs::path& path);

// Header "sample,vertex", then one row per sample.
void write_assignment(const fs::path& path, const LeafAssignment& z);
LeafAssignment read_assignment(const fs::path& path);

// Header with one column name per level (coarse to fine), then one row of
// labels per sample.
LabelHierarchy read_labels(const fs::path& path);
void write_labels(const fs::path& path, const LabelHierarchy& h);

// {"root_variance", "edges": [[parent, child, variance]...], "support",
// "weights", "sigma"} plus optional "gamma": {"log_mean", "log_sd"} and "root".
TreeSpec tree_spec_from_json(std::string_view text);
std::string tree_spec_to_json(const TreeSpec& spec);
TreeSpec read_tree_spec(const fs::path& path);

// Rows "a,b,value,size" in merge order, no header. The distance flavor
// reports max_entry - value so that heights grow towards the root.
void write_linkage(const fs::path& path, const MergeTrace& trace);
void write_linkage_distance(const fs::path& path, const MergeTrace& trace, double max_entry);
MergeTrace read_linkage(const fs::path& path);

// Header "r,d_r", one row per rank, then "r_hat,<value>".
void write_rank_curve(const fs::path& path, const RankSelection& sel);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

// Splits one CSV line on commas; no quoting.
std::vector<std::string> split_csv(std::string_view line);

}  // namespace dphc::io
