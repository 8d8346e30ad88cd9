#include "macroforge/prototyper.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "macroforge/rng.hpp"

namespace mf {

using nlohmann::json;

double prototype_hpwl(const Design& design, const std::vector<Point>& positions) {
  double total = 0.0;
  for (const auto& net : design.nets) {
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& pin : net.pins) {
      Point p;
      if (pin.is_port)
        p = {design.ports[pin.index].x, design.ports[pin.index].y};
      else
        p = positions[pin.index];
      p.x += pin.dx;
      p.y += pin.dy;
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    total += (max_x - min_x) + (max_y - min_y);
  }
  return total;
}

namespace {

struct CliqueEdge {
  int a;  // instance id, or -1-port_id for a port anchor
  int b;
  double w;
};

std::vector<CliqueEdge> clique_edges(const Design& d, int degree_cap) {
  std::vector<CliqueEdge> edges;
  for (const auto& net : d.nets) {
    int q = static_cast<int>(net.pins.size());
    if (q < 2 || q > degree_cap) continue;
    double w = 2.0 / q;
    for (int i = 0; i < q; ++i) {
      for (int j = i + 1; j < q; ++j) {
        auto key = [](const PinRef& p) { return p.is_port ? -1 - p.index : p.index; };
        int a = key(net.pins[i]);
        int b = key(net.pins[j]);
        if (a == b) continue;
        edges.push_back({a, b, w});
      }
    }
  }
  return edges;
}

}  // namespace

Prototype run_prototype(const Design& design, const FixedPositions& fixed,
                        const DensitySchedule& schedule, int k, uint64_t seed,
                        const PrototyperOptions& opts) {
  const double W = design.outline.width;
  const double H = design.outline.height;
  const int n_inst = static_cast<int>(design.instances.size());

  Prototype proto;
  proto.density_used = schedule.at(k);
  proto.positions.assign(n_inst, design.outline.center());

  Rng rng(seed ^ 0xab54a98ceb1f0ad2ULL);
  std::vector<bool> movable(n_inst, true);
  int n_movable = 0;
  double jitter = 0.01 * std::min(W, H);
  for (const auto& inst : design.instances) {
    if (static_cast<size_t>(inst.id) < fixed.size() && fixed[inst.id]) {
      movable[inst.id] = false;
      proto.positions[inst.id] = *fixed[inst.id];
    } else {
      proto.positions[inst.id] = {W / 2.0 + rng.uniform(-jitter, jitter),
                                  H / 2.0 + rng.uniform(-jitter, jitter)};
      ++n_movable;
    }
  }
  if (n_movable == 0) {
    proto.hpwl = prototype_hpwl(design, proto.positions);
    return proto;
  }

  auto edges = clique_edges(design, opts.net_degree_cap);

  auto clamp_pos = [&](int id, Point p) {
    const Instance& inst = design.instances[id];
    double hw = std::min(inst.width / 2.0, W / 2.0);
    double hh = std::min(inst.height / 2.0, H / 2.0);
    p.x = std::clamp(p.x, hw, W - hw);
    p.y = std::clamp(p.y, hh, H - hh);
    return p;
  };

  // Bins must hold several movable instances each, or every occupied bin
  // reads as overfull and the density pass degenerates into noise.
  double mean_side = 0.0;
  int counted = 0;
  for (const auto& inst : design.instances) {
    if (!movable[inst.id]) continue;
    mean_side += std::sqrt(inst.area());
    ++counted;
  }
  mean_side = counted > 0 ? mean_side / counted : 1.0;
  int grid = opts.bin_grid;
  if (mean_side > 0.0)
    grid = std::clamp(static_cast<int>(std::min(W, H) / (3.0 * mean_side)), 4,
                      opts.bin_grid);
  const double bin_w = W / grid;
  const double bin_h = H / grid;
  const double td = proto.density_used;
  std::vector<double> bin_area(static_cast<size_t>(grid) * grid);

  auto splat = [&](const Point& c, double area, double w, double h) {
    // Deposit the instance area over the bins its footprint covers.
    double x1 = c.x - w / 2.0, x2 = c.x + w / 2.0;
    double y1 = c.y - h / 2.0, y2 = c.y + h / 2.0;
    int bx1 = std::clamp(static_cast<int>(x1 / bin_w), 0, grid - 1);
    int bx2 = std::clamp(static_cast<int>(x2 / bin_w), 0, grid - 1);
    int by1 = std::clamp(static_cast<int>(y1 / bin_h), 0, grid - 1);
    int by2 = std::clamp(static_cast<int>(y2 / bin_h), 0, grid - 1);
    double denom = (bx2 - bx1 + 1.0) * (by2 - by1 + 1.0);
    for (int bx = bx1; bx <= bx2; ++bx)
      for (int by = by1; by <= by2; ++by)
        bin_area[static_cast<size_t>(by) * grid + bx] += area / denom;
  };

  // Quadratic wirelength solved by weighted-centroid sweeps (Jacobi, so
  // the result is order-independent), interleaved with a density pass that
  // pushes instances out of bins whose utilization exceeds the target.
  std::vector<double> acc_x(n_inst), acc_y(n_inst), acc_w(n_inst);
  double prev_obj = -1.0;
  int rising = 0;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    std::fill(acc_x.begin(), acc_x.end(), 0.0);
    std::fill(acc_y.begin(), acc_y.end(), 0.0);
    std::fill(acc_w.begin(), acc_w.end(), 0.0);
    for (const auto& e : edges) {
      Point pa = e.a >= 0 ? proto.positions[e.a]
                          : Point{design.ports[-1 - e.a].x, design.ports[-1 - e.a].y};
      Point pb = e.b >= 0 ? proto.positions[e.b]
                          : Point{design.ports[-1 - e.b].x, design.ports[-1 - e.b].y};
      if (e.a >= 0 && movable[e.a]) {
        acc_x[e.a] += e.w * pb.x;
        acc_y[e.a] += e.w * pb.y;
        acc_w[e.a] += e.w;
      }
      if (e.b >= 0 && movable[e.b]) {
        acc_x[e.b] += e.w * pa.x;
        acc_y[e.b] += e.w * pa.y;
        acc_w[e.b] += e.w;
      }
    }
    // Decaying wirelength step: early iterations are connectivity-driven,
    // late ones let the density pass freeze the spread layout in place.
    double damp = iter < 10 ? 1.0 : 0.7 * std::pow(0.985, iter - 10);
    for (int id = 0; id < n_inst; ++id) {
      if (!movable[id] || acc_w[id] <= 0.0) continue;
      Point target{acc_x[id] / acc_w[id], acc_y[id] / acc_w[id]};
      Point cur = proto.positions[id];
      proto.positions[id] = clamp_pos(
          id, {cur.x + damp * (target.x - cur.x), cur.y + damp * (target.y - cur.y)});
    }

    // Density pass.
    std::fill(bin_area.begin(), bin_area.end(), 0.0);
    for (int id = 0; id < n_inst; ++id) {
      const Instance& inst = design.instances[id];
      splat(proto.positions[id], inst.area(), inst.width, inst.height);
    }
    double bin_cap = bin_w * bin_h;
    double density_moved = 0.0;
    for (int id = 0; id < n_inst; ++id) {
      if (!movable[id]) continue;
      Point c = proto.positions[id];
      int bx = std::clamp(static_cast<int>(c.x / bin_w), 0, grid - 1);
      int by = std::clamp(static_cast<int>(c.y / bin_h), 0, grid - 1);
      double util = bin_area[static_cast<size_t>(by) * grid + bx] / bin_cap;
      if (util <= td) continue;
      // Move toward the nearest underfull bin, widening the search ring
      // until one is found: a cell stranded on a fixed macro must be able
      // to escape even when every adjacent bin is overfull too.
      int best_bx = bx, best_by = by;
      double best_util = util;
      bool found = false;
      for (int radius = 1; radius < grid && !found; ++radius) {
        for (int dx = -radius; dx <= radius; ++dx) {
          for (int dy = -radius; dy <= radius; ++dy) {
            if (std::max(std::abs(dx), std::abs(dy)) != radius) continue;
            int nx = bx + dx, ny = by + dy;
            if (nx < 0 || ny < 0 || nx >= grid || ny >= grid) continue;
            double u = bin_area[static_cast<size_t>(ny) * grid + nx] / bin_cap;
            if (u < best_util - 1e-12) {
              best_util = u;
              best_bx = nx;
              best_by = ny;
              if (u <= td) found = true;
            }
          }
        }
      }
      if (best_bx == bx && best_by == by) continue;
      double step = std::min(1.0, util - td);
      Point target{(best_bx + 0.5) * bin_w, (best_by + 0.5) * bin_h};
      Point moved = clamp_pos(
          id, {c.x + step * (target.x - c.x), c.y + step * (target.y - c.y)});
      density_moved += std::abs(moved.x - c.x) + std::abs(moved.y - c.y);
      proto.positions[id] = moved;
    }

    double obj = prototype_hpwl(design, proto.positions);
    if (prev_obj >= 0.0) {
      if (obj > prev_obj + 1e-12) {
        if (++rising >= 50)
          throw DesignError("prototype diverged: objective rose for 50 iterations");
      } else {
        rising = 0;
      }
      if (std::abs(prev_obj - obj) <= opts.stop_rel_change * std::max(1.0, prev_obj) &&
          density_moved <= 1e-9 * (W + H) * n_movable)
        break;
    }
    prev_obj = obj;
  }

  proto.hpwl = prototype_hpwl(design, proto.positions);
  return proto;
}

Prototype parse_prototype(const Design& design, const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DesignError(std::string("prototype parse error: ") + e.what());
  }
  std::unordered_map<std::string, Point> by_name;
  for (const auto& entry : doc.at("positions"))
    by_name[entry.at("ref").get<std::string>()] = {entry.at("x").get<double>(),
                                                   entry.at("y").get<double>()};
  Prototype proto;
  proto.positions.assign(design.instances.size(), {});
  const double W = design.outline.width;
  const double H = design.outline.height;
  for (const auto& inst : design.instances) {
    auto it = by_name.find(inst.name);
    if (it == by_name.end())
      throw DesignError("prototype file is missing instance '" + inst.name + "'");
    Point p = it->second;
    p.x = std::clamp(p.x, 0.0, W);
    p.y = std::clamp(p.y, 0.0, H);
    proto.positions[inst.id] = p;
  }
  proto.hpwl = prototype_hpwl(design, proto.positions);
  return proto;
}

Prototype inject_prototype(const Design& design, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DesignError("cannot open prototype file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_prototype(design, ss.str());
}

std::vector<Point> cluster_centroids(const Design& design,
                                     const Prototype& prototype,
                                     const std::vector<CellCluster>& clusters) {
  std::vector<Point> centroids(clusters.size(), design.outline.center());
  for (const auto& cluster : clusters) {
    double total = 0.0, sx = 0.0, sy = 0.0;
    for (int id : cluster.member_cell_ids) {
      double area = std::max(design.instances[id].area(), 1e-12);
      total += area;
      sx += area * prototype.positions[id].x;
      sy += area * prototype.positions[id].y;
    }
    if (total > 0.0) centroids[cluster.id] = {sx / total, sy / total};
  }
  return centroids;
}

}  // namespace mf
