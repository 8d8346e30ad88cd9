#pragma once

#include <vector>

#include "macroforge/netlist.hpp"

namespace mf {

struct MacroGroup {
  int id = -1;
  std::vector<int> member_macro_ids;  // instance ids
  double width = 0.0;                 // shared footprint
  double height = 0.0;

  double total_area() const {
    return width * height * static_cast<double>(member_macro_ids.size());
  }
};

struct CellCluster {
  int id = -1;
  std::vector<int> member_cell_ids;  // instance ids
  Point centroid;
};

// Dense symmetric affinity over [macros..., clusters...]. Entity index of
// macro instance m is design.macro_ordinal(m); cluster c maps to
// macro_count + c.
struct ConnectionMatrix {
  int n_macros = 0;
  int n_clusters = 0;
  std::vector<double> entries;  // unified A
  std::vector<double> wl;       // component A_wl (for inspection)
  std::vector<double> df;       // component A_df

  int size() const { return n_macros + n_clusters; }
  double at(int i, int j) const { return entries[static_cast<size_t>(i) * size() + j]; }
};

struct ConnectivityOptions {
  double footprint_tol = 1e-6;   // relative footprint tolerance for grouping
  double signature_cos = 0.8;    // cosine threshold for connection signatures
  int net_degree_cap = 64;       // nets above this degree are ignored (A_wl)
  int d_max = 3;                 // dataflow search depth
};

std::vector<MacroGroup> group_macros(const Design& design,
                                     const ConnectivityOptions& opts = {});

std::vector<CellCluster> cluster_cells(const Design& design,
                                       int target_cluster_count);

// Raw symmetric matrices over [macros..., clusters...], flattened row-major.
std::vector<double> extract_direct(const Design& design,
                                   const std::vector<CellCluster>& clusters,
                                   int net_degree_cap = 64);

std::vector<double> extract_dataflow(const Design& design,
                                     const std::vector<CellCluster>& clusters,
                                     int d_max = 3);

ConnectionMatrix build_matrix(const Design& design,
                              const std::vector<CellCluster>& clusters,
                              std::vector<double> a_wl, std::vector<double> a_df);

}  // namespace mf
