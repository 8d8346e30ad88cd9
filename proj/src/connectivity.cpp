#include "macroforge/connectivity.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <unordered_map>

namespace mf {

namespace {

std::string join_hier(const std::vector<std::string>& hier, size_t depth) {
  std::string s;
  for (size_t i = 0; i < hier.size() && i < depth; ++i) {
    s += hier[i];
    s += '/';
  }
  return s;
}

// Sparse per-macro peer weight vector over instances and ports, from the
// clique decomposition of nets. Key: instance id, or n_instances + port id.
std::vector<std::unordered_map<int, double>> peer_vectors(const Design& d,
                                                          int degree_cap) {
  int n_inst = static_cast<int>(d.instances.size());
  std::vector<std::unordered_map<int, double>> vec(n_inst);
  for (const auto& net : d.nets) {
    int q = static_cast<int>(net.pins.size());
    if (q < 2 || q > degree_cap) continue;
    double w = 2.0 / q;
    for (int i = 0; i < q; ++i) {
      const PinRef& a = net.pins[i];
      if (a.is_port || !d.instances[a.index].is_macro()) continue;
      for (int j = 0; j < q; ++j) {
        if (i == j) continue;
        const PinRef& b = net.pins[j];
        int key = b.is_port ? n_inst + b.index : b.index;
        if (!b.is_port && b.index == a.index) continue;
        vec[a.index][key] += w;
      }
    }
  }
  return vec;
}

double cosine(const std::unordered_map<int, double>& a,
              const std::unordered_map<int, double>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : a) {
    na += v * v;
    auto it = b.find(k);
    if (it != b.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : b) nb += v * v;
  return dot / std::sqrt(na * nb);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<MacroGroup> group_macros(const Design& design,
                                     const ConnectivityOptions& opts) {
  auto raw = peer_vectors(design, opts.net_degree_cap);

  // Signatures aggregate standard-cell peers by hierarchy leaf: two macros
  // serving the same logic block talk to the same leaves, rarely to the
  // same individual cells, so instance-level vectors would never match.
  int n_inst = static_cast<int>(design.instances.size());
  std::map<std::string, int> leaf_ids;
  std::vector<int> leaf_of(n_inst, -1);
  for (const auto& inst : design.instances) {
    if (inst.is_macro()) continue;
    std::string key = join_hier(inst.hier, SIZE_MAX);
    auto [it, _] = leaf_ids.insert({key, static_cast<int>(leaf_ids.size())});
    leaf_of[inst.id] = it->second;
  }
  // Macro peers likewise collapse to their parent hierarchy path, so the
  // members of one bus chain share a coordinate instead of pointing at each
  // other with disjoint instance keys.
  std::map<std::string, int> parent_ids;
  std::vector<int> parent_of(n_inst, -1);
  for (int id : design.macro_ids) {
    std::string key = join_hier(design.instances[id].hier, SIZE_MAX);
    auto [it, _] = parent_ids.insert({key, static_cast<int>(parent_ids.size())});
    parent_of[id] = it->second;
  }
  int n_leaves = static_cast<int>(leaf_ids.size());
  std::vector<std::unordered_map<int, double>> vecs(n_inst);
  for (int id : design.macro_ids) {
    for (const auto& [key, w] : raw[id]) {
      int out;
      if (key >= n_inst) {
        out = n_leaves + n_inst + (key - n_inst);  // port
      } else if (design.instances[key].is_macro()) {
        out = n_leaves + parent_of[key];
      } else {
        out = leaf_of[key];
      }
      vecs[id][out] += w;
    }
  }

  // Hierarchy buckets, keyed by the macro's full parent path.
  std::map<std::string, std::vector<int>> buckets;
  for (int id : design.macro_ids)
    buckets[join_hier(design.instances[id].hier, SIZE_MAX)].push_back(id);

  auto similar_footprint = [&](const Instance& a, const Instance& b) {
    double tw = opts.footprint_tol * std::max(a.width, b.width);
    double th = opts.footprint_tol * std::max(a.height, b.height);
    return std::abs(a.width - b.width) <= tw && std::abs(a.height - b.height) <= th;
  };

  // Within each bucket, macros with matching footprint and connection
  // signature (cosine over peer vectors) are grouped by connected
  // components, which keeps the partition invariant under index
  // permutation.
  std::vector<MacroGroup> groups;
  for (auto& [key, members] : buckets) {
    int n = static_cast<int>(members.size());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Instance& a = design.instances[members[i]];
        const Instance& b = design.instances[members[j]];
        if (!similar_footprint(a, b)) continue;
        if (cosine(vecs[members[i]], vecs[members[j]]) < opts.signature_cos)
          continue;
        uf.unite(i, j);
      }
    }
    std::map<int, std::vector<int>> comps;
    for (int i = 0; i < n; ++i) comps[uf.find(i)].push_back(members[i]);
    for (auto& [root, ids] : comps) {
      MacroGroup g;
      g.member_macro_ids = ids;
      std::sort(g.member_macro_ids.begin(), g.member_macro_ids.end());
      g.width = design.instances[g.member_macro_ids.front()].width;
      g.height = design.instances[g.member_macro_ids.front()].height;
      groups.push_back(std::move(g));
    }
  }
  std::sort(groups.begin(), groups.end(), [](const MacroGroup& a, const MacroGroup& b) {
    return a.member_macro_ids.front() < b.member_macro_ids.front();
  });
  for (size_t i = 0; i < groups.size(); ++i) groups[i].id = static_cast<int>(i);
  return groups;
}

namespace {

// Connection weight between each pair of current clusters, clique model.
double cluster_link(const Design& d, const std::vector<int>& assign, int a,
                    int b) {
  double w = 0.0;
  for (const auto& net : d.nets) {
    int q = static_cast<int>(net.pins.size());
    if (q < 2 || q > 64) continue;
    int in_a = 0, in_b = 0;
    for (const auto& pin : net.pins) {
      if (pin.is_port || d.instances[pin.index].is_macro()) continue;
      int c = assign[pin.index];
      if (c == a) ++in_a;
      if (c == b) ++in_b;
    }
    w += 2.0 / q * in_a * in_b;
  }
  return w;
}

}  // namespace

std::vector<CellCluster> cluster_cells(const Design& design,
                                       int target_cluster_count) {
  int target = std::max(1, target_cluster_count);
  std::vector<std::vector<int>> clusters;

  if (design.cell_count() == 0) return {};

  // Phase 1: cut the hierarchy tree at the shallowest depth that yields
  // at least `target` clusters.
  size_t max_depth = 0;
  for (int id : design.cell_ids)
    max_depth = std::max(max_depth, design.instances[id].hier.size());
  for (size_t depth = 0; depth <= max_depth; ++depth) {
    std::map<std::string, std::vector<int>> by_prefix;
    for (int id : design.cell_ids)
      by_prefix[join_hier(design.instances[id].hier, depth)].push_back(id);
    clusters.clear();
    for (auto& [prefix, ids] : by_prefix) clusters.push_back(ids);
    if (static_cast<int>(clusters.size()) >= target) break;
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  auto rebuild_assign = [&]() {
    std::vector<int> assign(design.instances.size(), -1);
    for (size_t c = 0; c < clusters.size(); ++c)
      for (int id : clusters[c]) assign[id] = static_cast<int>(c);
    return assign;
  };

  // Phase 2: greedily merge the smallest cluster into its most-connected
  // neighbor until the count is within [target/2, 2*target].
  while (static_cast<int>(clusters.size()) > 2 * target) {
    auto assign = rebuild_assign();
    int smallest = 0;
    for (size_t c = 1; c < clusters.size(); ++c)
      if (clusters[c].size() < clusters[smallest].size()) smallest = static_cast<int>(c);
    int best = -1;
    double best_w = -1.0;
    for (size_t c = 0; c < clusters.size(); ++c) {
      if (static_cast<int>(c) == smallest) continue;
      double w = cluster_link(design, assign, smallest, static_cast<int>(c));
      if (w > best_w + 1e-12) {
        best_w = w;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) best = smallest == 0 ? 1 : 0;
    auto& dst = clusters[best];
    dst.insert(dst.end(), clusters[smallest].begin(), clusters[smallest].end());
    std::sort(dst.begin(), dst.end());
    clusters.erase(clusters.begin() + smallest);
  }

  // If the hierarchy was too shallow, split the largest clusters by index
  // chunks until the lower bound holds.
  int lower = (target + 1) / 2;
  while (static_cast<int>(clusters.size()) < lower) {
    int largest = 0;
    for (size_t c = 1; c < clusters.size(); ++c)
      if (clusters[c].size() > clusters[largest].size()) largest = static_cast<int>(c);
    if (clusters[largest].size() < 2) break;
    auto& src = clusters[largest];
    std::vector<int> half(src.begin() + src.size() / 2, src.end());
    src.resize(src.size() / 2);
    clusters.push_back(std::move(half));
  }

  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  std::vector<CellCluster> out(clusters.size());
  for (size_t c = 0; c < clusters.size(); ++c) {
    out[c].id = static_cast<int>(c);
    out[c].member_cell_ids = std::move(clusters[c]);
    out[c].centroid = design.outline.center();
  }
  return out;
}

namespace {

std::vector<int> entity_of_instance(const Design& d,
                                    const std::vector<CellCluster>& clusters) {
  std::vector<int> entity(d.instances.size(), -1);
  for (int id : d.macro_ids) entity[id] = d.macro_ordinal(id);
  int n_macros = d.macro_count();
  for (const auto& cluster : clusters)
    for (int id : cluster.member_cell_ids) entity[id] = n_macros + cluster.id;
  return entity;
}

}  // namespace

std::vector<double> extract_direct(const Design& design,
                                   const std::vector<CellCluster>& clusters,
                                   int net_degree_cap) {
  auto entity = entity_of_instance(design, clusters);
  int n = design.macro_count() + static_cast<int>(clusters.size());
  std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
  for (const auto& net : design.nets) {
    int q = static_cast<int>(net.pins.size());
    if (q < 2 || q > net_degree_cap) continue;
    double w = 2.0 / q;
    for (int i = 0; i < q; ++i) {
      if (net.pins[i].is_port) continue;
      int e1 = entity[net.pins[i].index];
      for (int j = i + 1; j < q; ++j) {
        if (net.pins[j].is_port) continue;
        int e2 = entity[net.pins[j].index];
        if (e1 < 0 || e2 < 0 || e1 == e2) continue;
        a[static_cast<size_t>(e1) * n + e2] += w;
        a[static_cast<size_t>(e2) * n + e1] += w;
      }
    }
  }
  return a;
}

std::vector<double> extract_dataflow(const Design& design,
                                     const std::vector<CellCluster>& clusters,
                                     int d_max) {
  auto entity = entity_of_instance(design, clusters);
  int n = design.macro_count() + static_cast<int>(clusters.size());
  int n_inst = static_cast<int>(design.instances.size());

  std::vector<bool> registered(n_inst, false);
  for (const auto& inst : design.instances)
    registered[inst.id] = inst.is_macro() || inst.is_flip_flop;

  // Instance adjacency through nets (ports do not carry dataflow).
  std::vector<std::vector<int>> adj(n_inst);
  for (const auto& net : design.nets) {
    for (const auto& a : net.pins) {
      if (a.is_port) continue;
      for (const auto& b : net.pins) {
        if (b.is_port || b.index == a.index) continue;
        adj[a.index].push_back(b.index);
      }
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  // One registered hop: flood from u through combinational cells, which
  // are treated as wires, collecting the registered nodes reached.
  std::vector<std::vector<int>> reg_adj(n_inst);
  std::vector<int> mark(n_inst, -1);
  for (int u = 0; u < n_inst; ++u) {
    if (!registered[u]) continue;
    std::deque<int> queue;
    mark[u] = u;
    for (int v : adj[u]) {
      if (mark[v] == u) continue;
      mark[v] = u;
      if (registered[v])
        reg_adj[u].push_back(v);
      else
        queue.push_back(v);
    }
    while (!queue.empty()) {
      int c = queue.front();
      queue.pop_front();
      for (int v : adj[c]) {
        if (mark[v] == u) continue;
        mark[v] = u;
        if (registered[v])
          reg_adj[u].push_back(v);
        else
          queue.push_back(v);
      }
    }
    std::sort(reg_adj[u].begin(), reg_adj[u].end());
  }

  // BFS from each macro over the registered graph; a sink at (shortest)
  // registered depth D contributes 1/2^D on the directed entity pair.
  std::vector<double> directed(static_cast<size_t>(n) * n, 0.0);
  std::vector<int> depth(n_inst);
  for (int src : design.macro_ids) {
    std::fill(depth.begin(), depth.end(), -1);
    depth[src] = 0;
    std::deque<int> queue{src};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      if (depth[u] >= d_max) continue;
      for (int v : reg_adj[u]) {
        if (depth[v] >= 0) continue;
        depth[v] = depth[u] + 1;
        queue.push_back(v);
        int e1 = entity[src], e2 = entity[v];
        if (e1 >= 0 && e2 >= 0 && e1 != e2)
          directed[static_cast<size_t>(e1) * n + e2] += std::pow(0.5, depth[v]);
      }
    }
  }

  std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a[static_cast<size_t>(i) * n + j] = directed[static_cast<size_t>(i) * n + j] +
                                          directed[static_cast<size_t>(j) * n + i];
  return a;
}

ConnectionMatrix build_matrix(const Design& design,
                              const std::vector<CellCluster>& clusters,
                              std::vector<double> a_wl,
                              std::vector<double> a_df) {
  ConnectionMatrix m;
  m.n_macros = design.macro_count();
  m.n_clusters = static_cast<int>(clusters.size());
  size_t n2 = a_wl.size();
  m.wl = std::move(a_wl);
  m.df = std::move(a_df);
  m.entries.assign(n2, 0.0);

  double max_wl = 0.0, max_df = 0.0;
  for (double v : m.wl) max_wl = std::max(max_wl, v);
  for (double v : m.df) max_df = std::max(max_df, v);
  double swl = max_wl > 0.0 ? 1.0 / max_wl : 1.0;
  double sdf = max_df > 0.0 ? 1.0 / max_df : 1.0;
  for (size_t i = 0; i < n2; ++i) m.entries[i] = m.wl[i] * swl + m.df[i] * sdf;

  int n = m.size();
  for (int i = 0; i < n; ++i) m.entries[static_cast<size_t>(i) * n + i] = 0.0;
  return m;
}

}  // namespace mf
