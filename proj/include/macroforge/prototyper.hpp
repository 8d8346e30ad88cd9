#pragma once

#include <optional>

#include "macroforge/connectivity.hpp"
#include "macroforge/netlist.hpp"

namespace mf {

struct DensitySchedule {
  double td_init = 0.92;
  double td_finish = 0.5;

  double decay() const { return std::pow(td_finish / td_init, 0.1); }

  // Target density at outer iteration k (1-based), clamped at td_finish.
  double at(int k) const {
    return std::max(td_finish, td_init * std::pow(decay(), k - 1));
  }
};

struct Prototype {
  std::vector<Point> positions;  // instance centers, indexed by instance id
  double density_used = 0.0;
  double hpwl = 0.0;
};

struct PrototyperOptions {
  int bin_grid = 128;
  int max_iters = 1000;
  double stop_rel_change = 1e-7;
  int net_degree_cap = 64;
};

// Fixed macro positions: one entry per instance id; entries with a value
// are fixed obstacles, everything else is movable.
using FixedPositions = std::vector<std::optional<Point>>;

Prototype run_prototype(const Design& design, const FixedPositions& fixed,
                        const DensitySchedule& schedule, int k, uint64_t seed,
                        const PrototyperOptions& opts = {});

Prototype inject_prototype(const Design& design, const std::string& path);
Prototype parse_prototype(const Design& design, const std::string& json_text);

std::vector<Point> cluster_centroids(const Design& design,
                                     const Prototype& prototype,
                                     const std::vector<CellCluster>& clusters);

// HPWL of the design with pins resolved through the given instance
// positions (port pins at their fixed locations).
double prototype_hpwl(const Design& design, const std::vector<Point>& positions);

}  // namespace mf
